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

#include <optional>
#include <string>
#include <vector>

#include "ncl/attacks.hpp"
#include "ncl/config.hpp"
#include "ncl/corpus.hpp"
#include "ncl/encoder.hpp"
#include "ncl/evaluation.hpp"
#include "ncl/label_correction.hpp"
#include "ncl/noise.hpp"
#include "ncl/onion.hpp"
#include "ncl/trainer.hpp"

namespace ncl {

/// Everything the experiment derives from the raw corpus before any model
/// is trained. Only `train`, `dev` and `vocab` are visible to defenses;
/// `manifest` is ground truth for scoring.
struct PreparedData {
  PoisonSpec spec;
  Dataset clean_train;    // training split before poisoning
  Dataset train;          // poisoned training split, meta stripped
  Manifest manifest;      // poisoned training records
  Dataset dev;            // clean
  Dataset test;           // clean
  Dataset test_poisoned;  // non-target test records with the trigger applied
  Vocabulary vocab;       // built from `train`
};

/// Seeded sample of `n` records (all of them if fewer), in dataset order.
Dataset sample_records(const Dataset& dataset, std::size_t n, std::uint64_t seed);

/// Loads (or generates) the corpus, splits, poisons the training split and
/// triggers the test split, all from the config's seeds.
PreparedData prepare_data(const ExperimentConfig& config);

/// Cross-entropy training on `dataset` with the config's model and
/// optimizer; used for the undefended reference and the clean baseline.
Classifier train_ce_model(const Dataset& dataset, const Vocabulary& vocab,
                          const ExperimentConfig& config);

/// Noise augmentation plus voting label correction.
struct CorrectionStage {
  AugmentationSet augmentation;
  Classifier unsafe;    // M*: CE on the untrusted training split
  LabelSet original;    // labels as delivered
  LabelSet corrected;   // after voting
  CorrectionReport report;
};

CorrectionStage run_correction(const PreparedData& data, const ExperimentConfig& config);

/// Training arms built on top of the correction stage.
enum class DefenseArm {
  ncl,    // corrected labels + NCL objective
  uncl,   // corrected labels + objective without the supervised term
  wo_cl,  // corrected labels + cross-entropy only
  wo_lc,  // original labels + NCL objective
};

std::string_view to_string(DefenseArm arm);
DefenseArm parse_defense_arm(std::string_view name);

struct AlphaRow {
  double alpha = 0.0;
  double dev_accuracy = 0.0;
  double cacc = 0.0;
  double asr = 0.0;
};

/// Largest alpha whose dev accuracy stays within `tolerance` of the dev
/// accuracy at alpha = 1 (or at the first row if 1 is not a candidate).
double recommend_alpha(const std::vector<AlphaRow>& rows, double tolerance);

struct DefenseResult {
  Classifier model;
  TrainLog log;
  double alpha = 0.0;
  std::vector<AlphaRow> alpha_rows;  // filled when alpha was selected
};

/// Trains the requested arm. With `fixed_alpha` unset and selection
/// enabled, every candidate alpha is trained and the recommended one kept;
/// the cross-entropy arm ignores alpha.
DefenseResult train_defended(const PreparedData& data, const CorrectionStage& stage,
                             const ExperimentConfig& config, DefenseArm arm,
                             std::optional<double> fixed_alpha = std::nullopt);

struct OnionResult {
  double threshold = 0.0;
  double cacc = 0.0;
  double asr = 0.0;
  FilterResult filtered_test;
  FilterResult filtered_poisoned;
};

/// Test-time ONION-style filtering in front of `model`, with the language
/// model and threshold taken from the untrusted training split.
OnionResult run_onion(const PreparedData& data, const Classifier& model,
                      const ExperimentConfig& config);

EvalReport evaluate(const Classifier& model, const PreparedData& data, std::string arm,
                    const Classifier* reference, const ExperimentConfig& config);

struct RateRow {
  double rate = 0.0;
  std::string arm;
  double cacc = 0.0;
  double asr = 0.0;
};

/// Full pipeline per poisoning rate with shared seeds; two rows (defense,
/// no_defense) per rate.
std::vector<RateRow> sweep_rates(const ExperimentConfig& config, const std::vector<double>& rates);

std::string rate_rows_csv(const std::vector<RateRow>& rows);
std::string alpha_rows_csv(const std::vector<AlphaRow>& rows);

/// Minimal static SVG line chart: one polyline per series.
struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace ncl
