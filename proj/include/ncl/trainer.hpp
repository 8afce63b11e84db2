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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncl/corpus.hpp"
#include "ncl/encoder.hpp"
#include "ncl/objectives.hpp"
#include "ncl/rng.hpp"

namespace ncl {

enum class OptimizerKind { sgd_momentum, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  /// Homology groups per batch; N = batch_groups * group size.
  int batch_groups = 8;
  int epochs = 10;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  /// Global gradient-norm clip; <= 0 disables clipping.
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  ObjectiveConfig objective;

  void validate() const;
};

using Batch = std::vector<std::size_t>;

/// Shuffles the origin_id groups and packs `batch_groups` whole groups per
/// batch; the last batch may hold fewer groups. Throws DataError if group
/// sizes differ.
std::vector<Batch> make_batches(const Dataset& dataset, int batch_groups, Rng& rng);

struct EpochStats {
  int epoch = 0;
  double total = 0.0;
  double ucl = 0.0;
  double scl = 0.0;
  double ce = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> dev_accuracy;
};

struct TrainLog {
  std::vector<EpochStats> epochs;

  /// One JSON object per epoch.
  std::string to_jsonl() const;
  void save(const std::filesystem::path& path) const;
};

/// Minimizes the configured objective over `dataset` in place. Single-
/// threaded and bit-reproducible for a fixed config. Throws NumericError
/// naming the epoch and batch if the loss goes non-finite.
TrainLog train(Classifier& model, const Dataset& dataset, const TrainConfig& config,
               const Dataset* dev = nullptr);

/// Fraction of records whose prediction equals the record label.
double accuracy(const Classifier& model, const Dataset& dataset);

}  // namespace ncl
