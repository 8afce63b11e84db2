// Copyright 2026 The nclbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ncl/corpus.hpp"

namespace ncl {

/// Knobs for the synthetic binary sentiment corpus used by the desk-scale
/// experiments. Label 1 is positive, 0 negative.
struct ToyCorpusOptions {
  std::size_t size = 3000;
  double positive_fraction = 0.3;
  /// Share of sentences that contain both polarities, where the clause
  /// after the contrastive connective decides the label.
  double mixed_fraction = 0.2;
  std::uint64_t seed = 20240601;
};

Dataset generate_toy_corpus(const ToyCorpusOptions& options = {});

/// Synonym groups over the toy corpus vocabulary. Every group member maps to
/// the other members of its group, so every synonym is itself a corpus word.
std::map<std::string, std::vector<std::string>> toy_synonym_groups();

}  // namespace ncl
