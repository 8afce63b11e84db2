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

#include "ncl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ncl/error.hpp"
#include "ncl/rng.hpp"
#include "ncl/toy_corpus.hpp"

namespace ncl {

namespace {

// Re-raises library errors with the pipeline stage prefixed, keeping the
// error category (and therefore the CLI exit code).
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

Dataset sample_records(const Dataset& ds, std::size_t n, std::uint64_t seed) {
  if (ds.size() <= n) return ds;
  std::vector<std::size_t> idx(ds.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  shuffle_in_place(idx, rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  Dataset out;
  out.num_classes = ds.num_classes;
  out.split = ds.split;
  out.records.reserve(n);
  for (auto i : idx) out.records.push_back(ds.records[i]);
  return out;
}

PreparedData prepare_data(const ExperimentConfig& config) {
  return stage("prepare", [&] {
    PreparedData d;
    d.spec = config.poison_spec();
    const auto path = config.data_path();
    Dataset corpus = path.empty() ? generate_toy_corpus(config.toy_options())
                                  : load_dataset(path, config.num_classes(), Split::train);
    corpus = strip_meta(std::move(corpus));
    corpus.num_classes = config.num_classes();
    corpus.validate();
    const auto f = config.split_fractions();
    auto parts = split_dataset(corpus, {f[0], f[1], f[2]}, config.sub_seed("split"));
    d.clean_train = std::move(parts.train);
    d.dev = std::move(parts.dev);
    d.test = std::move(parts.test);
    auto poisoned = poison_dataset(d.clean_train, d.spec, config.style_table());
    d.manifest = std::move(poisoned.manifest);
    d.train = strip_meta(std::move(poisoned.dataset));
    d.test_poisoned = poison_test_set(d.test, d.spec, config.style_table());
    d.vocab = build_vocab(d.train, config.min_freq());
    return d;
  });
}

Classifier train_ce_model(const Dataset& dataset, const Vocabulary& vocab,
                          const ExperimentConfig& config) {
  return stage("train-ce", [&] {
    return train_unsafe_model(dataset, vocab, config.encoder(static_cast<int>(vocab.size())),
                              config.train());
  });
}

CorrectionStage run_correction(const PreparedData& data, const ExperimentConfig& config) {
  auto aug = stage("augment", [&] { return augment_dataset(data.train, config.noiser(), config.lexicon()); });
  auto unsafe = train_ce_model(data.train, data.vocab, config);
  return stage("label-correction", [&] {
    auto sets = relabel(unsafe, aug.replicas);
    LabelSet original = data.train.labels();
    LabelSet corrected = vote(sets, original);
    auto report = score_correction(data.train, corrected, &data.manifest);
    return CorrectionStage{std::move(aug), std::move(unsafe), std::move(original),
                           std::move(corrected), std::move(report)};
  });
}

std::string_view to_string(DefenseArm arm) {
  switch (arm) {
    case DefenseArm::ncl: return "ncl";
    case DefenseArm::uncl: return "uncl";
    case DefenseArm::wo_cl: return "wo_cl";
    case DefenseArm::wo_lc: return "wo_lc";
  }
  return "?";
}

DefenseArm parse_defense_arm(std::string_view name) {
  for (auto a : {DefenseArm::ncl, DefenseArm::uncl, DefenseArm::wo_cl, DefenseArm::wo_lc}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("unknown defense arm '" + std::string(name) + "'");
}

double recommend_alpha(const std::vector<AlphaRow>& rows, double tolerance) {
  if (rows.empty()) throw ConfigError("alpha selection needs at least one candidate");
  auto base = std::find_if(rows.begin(), rows.end(), [](const AlphaRow& r) { return r.alpha == 1.0; });
  if (base == rows.end()) base = rows.begin();
  double best = base->alpha;
  for (const auto& r : rows) {
    // A tiny slack keeps the rule robust to the accuracy being a ratio.
    if (r.dev_accuracy >= base->dev_accuracy - tolerance - 1e-12 && r.alpha > best) best = r.alpha;
  }
  return best;
}

DefenseResult train_defended(const PreparedData& data, const CorrectionStage& stage_in,
                             const ExperimentConfig& config, DefenseArm arm,
                             std::optional<double> fixed_alpha) {
  return stage("train-defense", [&] {
    const LabelSet& labels = arm == DefenseArm::wo_lc ? stage_in.original : stage_in.corrected;
    const Dataset combined = build_corrected_dataset(stage_in.augmentation, labels);
    TrainConfig tc = config.train();
    tc.objective.variant = arm == DefenseArm::wo_cl   ? LossVariant::ce
                           : arm == DefenseArm::uncl ? LossVariant::uncl
                                                     : LossVariant::ncl;
    const EncoderConfig ec = config.encoder(static_cast<int>(data.vocab.size()));
    const auto run = [&](double alpha) {
      TrainConfig t = tc;
      t.objective.alpha = alpha;
      Classifier model = Classifier::create(data.vocab, ec);
      TrainLog log = train(model, combined, t, &data.dev);
      return std::pair{std::move(model), std::move(log)};
    };
    const AlphaSelection sel = config.alpha_selection();
    if (tc.objective.variant == LossVariant::ce || fixed_alpha || !sel.enabled) {
      const double alpha = fixed_alpha.value_or(tc.objective.alpha);
      auto [model, log] = run(alpha);
      return DefenseResult{std::move(model), std::move(log), alpha, {}};
    }
    std::vector<AlphaRow> rows;
    std::vector<std::pair<Classifier, TrainLog>> runs;
    for (double a : sel.candidates) {
      runs.push_back(run(a));
      const Classifier& m = runs.back().first;
      rows.push_back({a, accuracy(m, data.dev), compute_cacc(m, data.test),
                      compute_asr(m, data.test_poisoned, data.spec.target_label)});
    }
    const double chosen = recommend_alpha(rows, sel.tolerance);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].alpha == chosen) {
        return DefenseResult{std::move(runs[i].first), std::move(runs[i].second), chosen,
                             std::move(rows)};
      }
    }
    throw ConfigError("recommended alpha is not a candidate");  // unreachable
  });
}

OnionResult run_onion(const PreparedData& data, const Classifier& model,
                      const ExperimentConfig& config) {
  return stage("onion", [&] {
    const OnionConfig oc = config.onion();
    const NGramLM lm = NGramLM::train(data.train, oc.order, oc.smoothing);
    const Dataset sample = sample_records(data.train, oc.calibration_size, config.sub_seed("onion.calibration"));
    OnionResult r;
    r.threshold = calibrate_threshold(lm, sample, oc.percentile);
    r.filtered_test = onion_filter(data.test, lm, r.threshold);
    r.filtered_poisoned = onion_filter(data.test_poisoned, lm, r.threshold);
    r.cacc = compute_cacc(model, r.filtered_test.dataset);
    r.asr = compute_asr(model, r.filtered_poisoned.dataset, data.spec.target_label);
    return r;
  });
}

EvalReport evaluate(const Classifier& model, const PreparedData& data, std::string arm,
                    const Classifier* reference, const ExperimentConfig& config) {
  return stage("evaluate", [&] {
    EvalReport report;
    report.arm = std::move(arm);
    report.cacc = compute_cacc(model, data.test);
    report.asr = compute_asr(model, data.test_poisoned, data.spec.target_label);
    if (reference != nullptr) {
      report.delta_asr = compute_asr(*reference, data.test_poisoned, data.spec.target_label) - report.asr;
    }
    report.config_fingerprint = config.fingerprint();
    return report;
  });
}

std::vector<RateRow> sweep_rates(const ExperimentConfig& config, const std::vector<double>& rates) {
  std::vector<RateRow> rows;
  for (double rate : rates) {
    if (!(rate > 0.0 && rate <= 1.0)) throw ConfigError("sweep rates must lie in (0, 1]");
    ExperimentConfig c = config;
    c.set("attack.rate", rate);
    const PreparedData data = prepare_data(c);
    const CorrectionStage st = run_correction(data, c);
    const DefenseResult def = train_defended(data, st, c, DefenseArm::ncl);
    rows.push_back({rate, "defense", compute_cacc(def.model, data.test),
                    compute_asr(def.model, data.test_poisoned, data.spec.target_label)});
    rows.push_back({rate, "no_defense", compute_cacc(st.unsafe, data.test),
                    compute_asr(st.unsafe, data.test_poisoned, data.spec.target_label)});
  }
  return rows;
}

std::string rate_rows_csv(const std::vector<RateRow>& rows) {
  std::string out = "rate,arm,cacc,asr\n";
  for (const auto& r : rows) {
    out += format_double(r.rate) + "," + r.arm + "," + format_double(r.cacc) + "," +
           format_double(r.asr) + "\n";
  }
  return out;
}

std::string alpha_rows_csv(const std::vector<AlphaRow>& rows) {
  std::string out = "alpha,dev_accuracy,cacc,asr\n";
  for (const auto& r : rows) {
    out += format_double(r.alpha) + "," + format_double(r.dev_accuracy) + "," +
           format_double(r.cacc) + "," + format_double(r.asr) + "\n";
  }
  return out;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series) {
  constexpr double kW = 480, kH = 320, kL = 60, kR = 110, kT = 40, kB = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = 0.0, y1 = 1.0;
  for (const auto& s : series) {
    for (double x : s.x) x0 = std::min(x0, x), x1 = std::max(x1, x);
    for (double y : s.y) y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  const auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  const auto py = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
    << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << x_label << "</text>\n";
  o << "<text x=\"14\" y=\"" << (kT + kH - kB) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
    << (kT + kH - kB) / 2 << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = y0 + (y1 - y0) * t / 4.0;
    o << "<text x=\"" << kL - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
      << format_double(std::round(y * 100) / 100) << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* c = colors[i % 6];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      o << (k ? " " : "") << px(s.x[k]) << "," << py(s.y[k]);
    }
    o << "\"/>\n";
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      o << "<text x=\"" << px(s.x[k]) << "\" y=\"" << kH - kB + 14 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << format_double(s.x[k]) << "</text>\n";
    }
    o << "<text x=\"" << kW - kR + 8 << "\" y=\"" << kT + 16 * (i + 1) << "\" font-size=\"11\" fill=\"" << c
      << "\">" << s.name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace ncl
