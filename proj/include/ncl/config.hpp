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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ncl/attacks.hpp"
#include "ncl/encoder.hpp"
#include "ncl/noise.hpp"
#include "ncl/toy_corpus.hpp"
#include "ncl/trainer.hpp"

namespace ncl {

/// Environment variable that, when set, replaces `output.dir`.
inline constexpr const char* kOutputRootEnv = "NCL_OUTPUT_ROOT";

/// Default payload of the sentence-level trigger.
inline constexpr std::string_view kDefaultSentenceTrigger = "I watch this movie";

/// Settings of the ONION-style filter baseline.
struct OnionConfig {
  int order = 2;
  double smoothing = 0.1;
  double percentile = 0.95;
  std::size_t calibration_size = 500;
};

/// Settings of the alpha-selection protocol used by `defend`.
struct AlphaSelection {
  bool enabled = true;
  std::vector<double> candidates = {1.0, 2.0, 4.0, 8.0};
  double tolerance = 0.01;
};

/// A whole experiment as one flat object of dotted keys (see README for the
/// schema). Values are type-checked against the defaults; unknown keys are
/// rejected. Typed views below validate on access and throw ConfigError.
class ExperimentConfig {
 public:
  using Json = nlohmann::ordered_json;

  ExperimentConfig();

  /// Defaults overlaid with the keys of a JSON file.
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Type-checked assignment of one dotted key.
  void set(std::string_view key, const Json& value);
  /// "key=value"; the value is parsed as JSON, or taken as a string if that
  /// fails.
  void apply_override(std::string_view assignment);

  const Json& values() const { return values_; }
  const Json& at(std::string_view key) const;

  /// Canonical dump (sorted by key declaration order).
  std::string dump() const;
  /// 16 hex digits of FNV-1a over the canonical dump.
  std::string fingerprint() const;

  std::uint64_t seed() const;
  std::uint64_t sub_seed(std::string_view component) const;

  /// Output directory, honouring the environment override.
  std::filesystem::path output_dir() const;

  /// Empty path means the built-in toy corpus.
  std::filesystem::path data_path() const;
  ToyCorpusOptions toy_options() const;
  std::vector<double> split_fractions() const;
  int num_classes() const;
  int min_freq() const;
  SynonymLexicon lexicon() const;
  StyleTable style_table() const;

  PoisonSpec poison_spec() const;
  NoiserConfig noiser() const;
  EncoderConfig encoder(int vocab_size) const;
  TrainConfig train() const;
  AlphaSelection alpha_selection() const;
  OnionConfig onion() const;
  std::size_t pearson_samples() const;
  bool plots() const;

 private:
  Json values_;
};

}  // namespace ncl
