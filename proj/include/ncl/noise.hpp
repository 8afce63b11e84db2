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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ncl/corpus.hpp"
#include "ncl/rng.hpp"

namespace ncl {

enum class NoiserKind { synonym_dropout, syntactic, external };

std::string_view to_string(NoiserKind kind);
NoiserKind parse_noiser_kind(std::string_view name);

struct NoiserConfig {
  NoiserKind kind = NoiserKind::synonym_dropout;
  int n = 3;
  /// One intensity per replica, strictly increasing, each in (0, 1].
  std::vector<double> intensities = {0.5, 0.7, 0.9};
  std::uint64_t base_seed = 0;
  /// Shell command for NoiserKind::external. "{intensity}" and "{seed}" are
  /// substituted before running.
  std::string external_command;

  void validate() const;
};

class SynonymLexicon {
 public:
  SynonymLexicon() = default;
  explicit SynonymLexicon(std::map<std::string, std::vector<std::string>> entries);

  static SynonymLexicon load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  /// Lexicon over the toy corpus vocabulary.
  static SynonymLexicon builtin();

  /// Empty when the token has no entry.
  const std::vector<std::string>& synonyms(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

/// Each token, independently with probability `intensity`, is replaced by a
/// uniformly drawn synonym or dropped when it has none. At least one token
/// survives. Returns the input unchanged when no token was touched;
/// otherwise the space-joined token stream.
std::string synonym_dropout_noise(std::string_view text, double intensity,
                                  const SynonymLexicon& lexicon, Rng& rng);

/// Recasts a sentence into the fixed frame "given that <body> , so it goes ."
/// The frame is a fixed point.
std::string syntactic_noise(std::string_view text);

/// Runs the external noiser: one sentence per line in on stdin, one out on
/// stdout, 1:1. Throws DataError on a line-count mismatch or nonzero exit.
std::vector<std::string> run_external_noiser(const std::string& command_template,
                                             const std::vector<std::string>& inputs,
                                             double intensity, std::uint64_t seed);

struct AugmentationSet {
  Dataset original;
  std::vector<Dataset> replicas;

  std::size_t n() const { return replicas.size(); }
};

/// Builds replica i (1-based) with intensities[i-1] and seed base_seed + i.
/// Replica record k keeps the origin_id and label of original record k and
/// gets id "<id>#r<i>".
AugmentationSet augment_dataset(const Dataset& d0, const NoiserConfig& config,
                                const SynonymLexicon& lexicon = SynonymLexicon::builtin());

}  // namespace ncl
