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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncl/attacks.hpp"
#include "ncl/corpus.hpp"
#include "ncl/encoder.hpp"
#include "ncl/label_correction.hpp"

namespace ncl {

/// Accuracy on a clean test split. Throws DataError when empty.
double compute_cacc(const Classifier& model, const Dataset& clean_test);

/// Fraction of triggered test records predicted as `target_label`.
double compute_asr(const Classifier& model, const Dataset& poisoned_test, Label target_label);

/// Pearson correlation of two equal-length vectors; empty when either has
/// zero variance or fewer than two entries.
std::optional<double> pearson_r(std::span<const double> a, std::span<const double> b);

struct PearsonSample {
  std::string id;
  std::optional<double> r;
};

struct PearsonResult {
  std::vector<PearsonSample> samples;
  std::optional<double> median;
  std::optional<double> mean;
  std::size_t missing = 0;
};

/// Per sample: Pearson r between the embedding of the benign text and of
/// its triggered copy, treating embedding dimensions as paired observations.
/// Only word and sentence attacks are accepted.
PearsonResult pearson_analysis(const Classifier& model, const Dataset& benign,
                               const PoisonSpec& spec);

/// CSV: id,label,is_poisoned,e0..e{d-1}. is_poisoned is empty without a
/// manifest.
void dump_embeddings(const Classifier& model, const Dataset& dataset,
                     const std::filesystem::path& path, const Manifest* manifest = nullptr);

struct EvalReport {
  std::string arm;
  double cacc = 0.0;
  double asr = 0.0;
  std::optional<double> delta_asr;
  std::optional<CorrectionReport> correction;
  std::optional<double> pearson_median;
  std::optional<double> pearson_mean;
  std::string pearson_path;
  std::string config_fingerprint;

  std::string to_json() const;
};

/// Formats a double with enough digits to round-trip and no locale effects.
std::string format_double(double value);

}  // namespace ncl
