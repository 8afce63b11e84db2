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

#include <filesystem>
#include <string>
#include <vector>

#include "ncl/corpus.hpp"
#include "ncl/encoder.hpp"
#include "ncl/noise.hpp"
#include "ncl/trainer.hpp"

namespace ncl {

/// Class indices aligned to a dataset's record order.
using LabelSet = std::vector<Label>;

struct CorrectionReport {
  std::size_t num_changed = 0;
  std::vector<std::string> changed_ids;
  // Filled only when a manifest is supplied.
  bool scored = false;
  std::size_t num_poisoned = 0;
  std::size_t num_clean = 0;
  double recall = 0.0;       // poisoned records whose label was restored away from the target
  double false_flag = 0.0;   // clean records whose label was changed

  std::string to_json() const;
  void save(const std::filesystem::path& path) const;
};

/// The unsafe model M*: the configured encoder trained on D0 with plain
/// cross-entropy.
Classifier train_unsafe_model(const Dataset& d0, const Vocabulary& vocab,
                              const EncoderConfig& model_config, TrainConfig train_config);

/// Argmax predictions of `model` on each replica.
std::vector<LabelSet> relabel(const Classifier& model, const std::vector<Dataset>& replicas);

/// Per record: the strict-majority label across `label_sets` if one exists,
/// otherwise the original label. Throws DataError on misaligned inputs.
LabelSet vote(const std::vector<LabelSet>& label_sets, const LabelSet& original_labels);

/// Writes `corrected` into D0 and every replica and concatenates them
/// (D0 first, then D1..Dn) into one training set of size (n+1)*|D0|.
Dataset build_corrected_dataset(const AugmentationSet& aug, const LabelSet& corrected);

/// Counts changes against D0's labels; when `manifest` is given also scores
/// recall over manifest-poisoned ids and the false-flag rate over the rest.
CorrectionReport score_correction(const Dataset& d0, const LabelSet& corrected,
                                  const Manifest* manifest = nullptr);

}  // namespace ncl
