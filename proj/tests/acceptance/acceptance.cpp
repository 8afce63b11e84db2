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

// Acceptance harness: evaluates the twelve acceptance criteria and prints one
// PASS/FAIL line per criterion. Exact criteria (1-3, 10a) compare against
// independent oracles; empirical criteria (4-11) run the defense pipeline on
// the built-in toy corpus over seeds 1, 2 and 3; criterion 12 reruns the
// command-line tool and compares outputs byte for byte.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "ncl/error.hpp"
#include "ncl/pipeline.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

using ncl::AttackKind;
using ncl::DefenseArm;
using ncl::Matrix;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeeds[] = {1, 2, 3};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << v;
  return o.str();
}

std::string sci(double v) {
  std::ostringstream o;
  o.setf(std::ios::scientific);
  o.precision(2);
  o << v;
  return o.str();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string join(const std::vector<double>& v, int digits = 3) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i], digits);
  return out + "]";
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ------------------------------------------------------------ math criteria

ncl_test::Mat to_mat(const Matrix& m) {
  ncl_test::Mat out = ncl_test::zeros(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

ncl::EncodedBatch random_batch(std::mt19937_64& gen, int n, int dim, int classes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  std::uniform_int_distribution<int> grp(0, std::max(0, n / 2));
  ncl::EncodedBatch b;
  b.embeddings = Matrix(n, dim);
  b.logits = Matrix(n, classes);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) b.embeddings(i, d) = normal(gen);
    for (int c = 0; c < classes; ++c) b.logits(i, c) = 2.0 * normal(gen);
    b.labels.push_back(cls(gen));
    b.homology_ids.push_back(grp(gen));
  }
  return b;
}

Outcome criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(1001);
  std::uniform_int_distribution<int> size(1, 6), dim(1, 8), classes(2, 4);
  std::uniform_real_distribution<double> weight(0.05, 4.0), temp(0.05, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(gen);
    const auto b = random_batch(gen, n, dim(gen), classes(gen));
    ncl::ObjectiveConfig c;
    c.alpha = weight(gen);
    c.beta = weight(gen);
    c.gamma = weight(gen);
    c.tau0 = temp(gen);
    c.tau1 = temp(gen);
    const bool per_pair = trial % 2 == 1;
    c.pair_normalization = per_pair ? ncl::PairNormalization::pairs : ncl::PairNormalization::batch;
    const auto r = ncl::ncl_loss(b, c);
    const auto s = ncl_test::naive_similarity(to_mat(b.embeddings));
    const std::vector<std::int64_t> label_keys(b.labels.begin(), b.labels.end());
    const double ucl = ncl_test::naive_contrastive(s, b.homology_ids, c.tau0, per_pair);
    const double scl = ncl_test::naive_contrastive(s, label_keys, c.tau1, per_pair);
    const double ce = ncl_test::naive_ce(to_mat(b.logits), b.labels);
    const double total = ncl_test::naive_ncl(to_mat(b.embeddings), to_mat(b.logits), b.labels, b.homology_ids,
                                             {c.alpha, c.beta, c.gamma, c.tau0, c.tau1}, per_pair);
    worst = std::max({worst, std::abs(r.ucl - ucl), std::abs(r.scl - scl), std::abs(r.ce - ce),
                      std::abs(r.total - total)});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0,
          "200 batches, max abs diff " + sci(worst) + ", " + fmt(secs, 2) + " s (limit 10 s)"};
}

// Norm-wise relative error between an analytic gradient and central
// differences of `loss` over every entry of `x`.
double gradient_error(Matrix x, const Matrix& analytic, const std::function<double(const Matrix&)>& loss) {
  const double h = 1e-5;
  Matrix fd(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double orig = x.data()[k];
    x.data()[k] = orig + h;
    const double up = loss(x);
    x.data()[k] = orig - h;
    const double down = loss(x);
    x.data()[k] = orig;
    fd.data()[k] = (up - down) / (2 * h);
  }
  const double scale = std::max({fd.norm(), analytic.norm(), 1e-8});
  return (fd - analytic).norm() / scale;
}

Outcome criterion_2() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(2002);
  std::uniform_int_distribution<int> size(2, 6), dim(2, 8);
  std::uniform_real_distribution<double> weight(0.1, 4.0);
  // Configurations isolating each term: UCL alone (on embeddings), SCL alone,
  // CE, uNCL and the full objective under both pair normalizations.
  struct Case {
    const char* name;
    ncl::LossVariant variant;
    double alpha, beta;
    ncl::PairNormalization norm;
  };
  const Case cases[] = {
      {"ucl", ncl::LossVariant::ncl, 1.0, 0.0, ncl::PairNormalization::batch},
      {"scl", ncl::LossVariant::ncl, 0.0, 1.0, ncl::PairNormalization::batch},
      {"ce", ncl::LossVariant::ce, 0.0, 0.0, ncl::PairNormalization::batch},
      {"uncl", ncl::LossVariant::uncl, -1.0, 0.0, ncl::PairNormalization::batch},
      {"ncl", ncl::LossVariant::ncl, -1.0, -1.0, ncl::PairNormalization::batch},
      {"ncl-pairs", ncl::LossVariant::ncl, -1.0, -1.0, ncl::PairNormalization::pairs},
  };
  double worst = 0.0;
  std::string worst_case;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = size(gen);
    const auto batch = random_batch(gen, n, dim(gen), 3);
    for (const auto& cs : cases) {
      ncl::ObjectiveConfig c;
      c.variant = cs.variant;
      c.alpha = cs.alpha < 0 ? weight(gen) : cs.alpha;
      c.beta = cs.beta < 0 ? weight(gen) : cs.beta;
      c.gamma = weight(gen);
      c.pair_normalization = cs.norm;
      ncl::LossGradients g;
      ncl::ncl_loss(batch, c, &g);
      const double e_emb = gradient_error(batch.embeddings, g.d_embeddings, [&](const Matrix& e) {
        auto b = batch;
        b.embeddings = e;
        return ncl::ncl_loss(b, c).total;
      });
      const double e_log = gradient_error(batch.logits, g.d_logits, [&](const Matrix& l) {
        auto b = batch;
        b.logits = l;
        return ncl::ncl_loss(b, c).total;
      });
      if (std::max(e_emb, e_log) > worst) {
        worst = std::max(e_emb, e_log);
        worst_case = cs.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0, "50 batches x 6 objectives, max rel err " + sci(worst) +
                                           " (" + worst_case + "), " + fmt(secs, 2) + " s (limit 30 s)"};
}

bool round_off_equal(double a, double b) { return std::abs(a - b) <= 4e-15 * std::max(1.0, std::abs(b)); }

Outcome criterion_3() {
  std::mt19937_64 gen(3003);
  std::uniform_int_distribution<int> size(1, 6), dim(1, 8);
  std::uniform_real_distribution<double> weight(0.05, 4.0);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = random_batch(gen, size(gen), dim(gen), 3);
    const double ce = ncl::ce_loss(b.logits, b.labels);
    const Matrix sim = ncl::similarity_matrix(b.embeddings);

    ncl::ObjectiveConfig ce_cfg;
    ce_cfg.variant = ncl::LossVariant::ce;
    ce_cfg.alpha = weight(gen);
    ce_cfg.gamma = weight(gen);
    const double v1 = ncl::ncl_loss(b, ce_cfg).total;

    ncl::ObjectiveConfig zero;
    zero.alpha = 0.0;
    zero.beta = 0.0;
    zero.gamma = weight(gen);
    const double v2 = ncl::ncl_loss(b, zero).total;
    const double e2 = zero.gamma * ce / std::sqrt(zero.gamma);

    ncl::ObjectiveConfig un;
    un.variant = ncl::LossVariant::uncl;
    un.alpha = weight(gen);
    un.beta = weight(gen);  // ignored by the variant
    un.gamma = weight(gen);
    const double v3 = ncl::ncl_loss(b, un).total;
    const double e3 = (un.alpha * ncl::ucl_loss(sim, b.homology_ids, un.tau0) + un.gamma * ce) /
                      std::sqrt(un.alpha + un.gamma);

    for (auto [got, want] : {std::pair{v1, ce}, std::pair{v2, e2}, std::pair{v3, e3}}) {
      worst = std::max(worst, std::abs(got - want));
      failures += !round_off_equal(got, want);
    }
  }
  return {failures == 0, "200 batches x 3 identities, " + std::to_string(failures) +
                             " failures, max abs diff " + sci(worst)};
}

// ------------------------------------------------------ experiment cache

struct Key {
  std::uint64_t seed;
  AttackKind attack;
  double rate;
  auto operator<=>(const Key&) const = default;
};

struct Scenario {
  ncl::ExperimentConfig config;
  ncl::PreparedData data;
  double data_secs = 0.0;
  std::unique_ptr<ncl::CorrectionStage> stage;  // includes M*, the no-defense model
  double stage_secs = 0.0;
  std::map<DefenseArm, std::unique_ptr<ncl::DefenseResult>> arms;
  std::map<DefenseArm, double> arm_secs;
  std::optional<ncl::OnionResult> onion;
  double onion_secs = 0.0;
};

class Experiments {
 public:
  Scenario& scenario(const Key& k) {
    auto& slot = cache_[k];
    if (!slot) {
      const auto t0 = Clock::now();
      ncl::ExperimentConfig c;
      c.set("seed", k.seed);
      c.set("attack.kind", std::string(ncl::to_string(k.attack)));
      c.set("attack.rate", k.rate);
      auto data = ncl::prepare_data(c);
      slot = std::make_unique<Scenario>();
      slot->config = std::move(c);
      slot->data = std::move(data);
      slot->data_secs = seconds_since(t0);
    }
    return *slot;
  }

  // Data preparation, augmentation, M* and label correction.
  Scenario& corrected(const Key& k, double* cost = nullptr) {
    Scenario& s = scenario(k);
    if (!s.stage) {
      const auto t0 = Clock::now();
      s.stage = std::make_unique<ncl::CorrectionStage>(ncl::run_correction(s.data, s.config));
      s.stage_secs = seconds_since(t0);
    }
    if (cost) *cost += s.data_secs + s.stage_secs;
    return s;
  }

  const ncl::DefenseResult& defended(const Key& k, DefenseArm arm, double* cost = nullptr) {
    Scenario& s = corrected(k, cost);
    auto& slot = s.arms[arm];
    if (!slot) {
      const auto t0 = Clock::now();
      slot = std::make_unique<ncl::DefenseResult>(ncl::train_defended(s.data, *s.stage, s.config, arm));
      s.arm_secs[arm] = seconds_since(t0);
    }
    if (cost) *cost += s.arm_secs[arm];
    return *slot;
  }

  const ncl::OnionResult& onion(const Key& k, double* cost = nullptr) {
    Scenario& s = corrected(k, cost);
    if (!s.onion) {
      const auto t0 = Clock::now();
      s.onion = ncl::run_onion(s.data, s.stage->unsafe, s.config);
      s.onion_secs = seconds_since(t0);
    }
    if (cost) *cost += s.onion_secs;
    return *s.onion;
  }

  // CE model trained on the clean version of the training split.
  const ncl::Classifier& clean_model(const Key& k, double* cost = nullptr) {
    Scenario& s = scenario(k);
    auto& slot = clean_[k];
    if (!slot) {
      const auto t0 = Clock::now();
      slot = std::make_unique<ncl::Classifier>(ncl::train_ce_model(s.data.clean_train, s.data.vocab, s.config));
      clean_secs_[k] = seconds_since(t0);
    }
    if (cost) *cost += s.data_secs + clean_secs_[k];
    return *slot;
  }

  static double asr(const Scenario& s, const ncl::Classifier& m) {
    return ncl::compute_asr(m, s.data.test_poisoned, s.data.spec.target_label);
  }
  static double cacc(const Scenario& s, const ncl::Classifier& m) { return ncl::compute_cacc(m, s.data.test); }

 private:
  std::map<Key, std::unique_ptr<Scenario>> cache_;
  std::map<Key, std::unique_ptr<ncl::Classifier>> clean_;
  std::map<Key, double> clean_secs_;
};

Key word(std::uint64_t seed, double rate = 0.1) { return {seed, AttackKind::word, rate}; }
Key sentence(std::uint64_t seed) { return {seed, AttackKind::sentence, 0.1}; }

// -------------------------------------------------- empirical criteria

Outcome criterion_4(Experiments& ex) {
  double cost = 0.0;
  bool ok = true;
  std::vector<double> asrs, gaps;
  for (auto seed : kSeeds) {
    Scenario& s = ex.corrected(word(seed), &cost);
    const auto& clean = ex.clean_model(word(seed), &cost);
    const double asr = Experiments::asr(s, s.stage->unsafe);
    const double gap = Experiments::cacc(s, clean) - Experiments::cacc(s, s.stage->unsafe);
    asrs.push_back(asr);
    gaps.push_back(gap);
    ok = ok && asr >= 0.90 && std::abs(gap) <= 0.03;
  }
  return {ok && cost < 300.0, "no-defense ASR " + join(asrs) + " (>= 0.90), clean-minus-backdoored CACC " +
                                  join(gaps) + " (|.| <= 0.03), " + fmt(cost, 1) + " s (limit 300 s)"};
}

Outcome criterion_5(Experiments& ex) {
  double cost = 0.0;
  bool ok = true;
  std::string detail;
  for (auto attack : {AttackKind::word, AttackKind::sentence}) {
    std::vector<double> delta, degradation;
    for (auto seed : kSeeds) {
      const Key k{seed, attack, 0.1};
      const auto& def = ex.defended(k, DefenseArm::ncl, &cost);
      Scenario& s = ex.corrected(k);
      delta.push_back(Experiments::asr(s, s.stage->unsafe) - Experiments::asr(s, def.model));
      degradation.push_back(Experiments::cacc(s, s.stage->unsafe) - Experiments::cacc(s, def.model));
    }
    const bool arm_ok = mean(delta) >= 0.30 && mean(degradation) <= 0.04;
    ok = ok && arm_ok;
    detail += std::string(ncl::to_string(attack)) + ": dASR " + join(delta) + " mean " + fmt(mean(delta)) +
              " (>= 0.30), CACC drop mean " + fmt(mean(degradation)) + " (<= 0.04); ";
  }
  return {ok && cost < 1800.0, detail + fmt(cost, 1) + " s (limit 1800 s)"};
}

Outcome criterion_6(Experiments& ex) {
  int ncl_inversions = 0, ablation_inversions = 0;
  std::string detail;
  for (auto seed : kSeeds) {
    const Key k = word(seed);
    Scenario& s = ex.corrected(k);
    const double none = Experiments::asr(s, s.stage->unsafe);
    const double full = Experiments::asr(s, ex.defended(k, DefenseArm::ncl).model);
    const double wo_cl = Experiments::asr(s, ex.defended(k, DefenseArm::wo_cl).model);
    const double wo_lc = Experiments::asr(s, ex.defended(k, DefenseArm::wo_lc).model);
    // Strict comparisons: a tie counts as an inversion.
    ncl_inversions += !(full < wo_cl) + !(full < wo_lc);
    ablation_inversions += !(wo_cl < none) + !(wo_lc < none);
    detail += "seed " + std::to_string(seed) + " ncl/wo_cl/wo_lc/none " + fmt(full, 4) + "/" + fmt(wo_cl, 4) +
              "/" + fmt(wo_lc, 4) + "/" + fmt(none, 4) + "; ";
  }
  return {ncl_inversions <= 1 && ablation_inversions <= 1,
          detail + "inversions: ncl-vs-ablations " + std::to_string(ncl_inversions) + "/6, ablations-vs-none " +
              std::to_string(ablation_inversions) + "/6 (<= 1 each)"};
}

Outcome criterion_7(Experiments& ex) {
  std::vector<double> gap, onion_hi, onion_lo;
  for (auto seed : kSeeds) {
    const Key hi = word(seed, 0.5), lo = word(seed, 0.1);
    Scenario& s_hi = ex.corrected(hi);
    const double none_hi = Experiments::asr(s_hi, s_hi.stage->unsafe);
    gap.push_back(none_hi - Experiments::asr(s_hi, ex.defended(hi, DefenseArm::ncl).model));
    onion_hi.push_back(none_hi - ex.onion(hi).asr);
    Scenario& s_lo = ex.corrected(lo);
    onion_lo.push_back(Experiments::asr(s_lo, s_lo.stage->unsafe) - ex.onion(lo).asr);
  }
  const bool ok = mean(gap) >= 0.25 && mean(onion_hi) < mean(onion_lo);
  return {ok, "rate 0.5 none-minus-NCL ASR " + join(gap) + " mean " + fmt(mean(gap)) +
                  " (>= 0.25); ONION dASR rate 0.5 mean " + fmt(mean(onion_hi)) + " < rate 0.1 mean " +
                  fmt(mean(onion_lo))};
}

Outcome criterion_8(Experiments& ex) {
  std::vector<double> w, s;
  for (auto seed : kSeeds) {
    for (auto [key, out] : {std::pair{word(seed), &w}, std::pair{sentence(seed), &s}}) {
      Scenario& sc = ex.corrected(key);
      out->push_back(Experiments::asr(sc, sc.stage->unsafe) - ex.onion(key).asr);
    }
  }
  const double diff = mean(w) - mean(s);
  return {diff >= 0.20, "ONION dASR word " + join(w) + " vs sentence " + join(s) + ", mean difference " +
                            fmt(diff) + " (>= 0.20)"};
}

// Non-increasing with at most one upward step, itself at most 0.02.
bool nearly_non_increasing(const std::vector<double>& v) {
  int inversions = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) {
      ++inversions;
      if (v[i] - v[i - 1] > 0.02) return false;
    }
  }
  return inversions <= 1;
}

Outcome criterion_9(Experiments& ex) {
  const auto& def = ex.defended(word(kSeeds[0]), DefenseArm::ncl);
  std::vector<double> alphas, asr, cacc;
  for (const auto& r : def.alpha_rows) {
    alphas.push_back(r.alpha);
    asr.push_back(r.asr);
    cacc.push_back(r.cacc);
  }
  const bool grid = alphas == std::vector<double>{1, 2, 4, 8};
  return {grid && nearly_non_increasing(asr) && nearly_non_increasing(cacc),
          "seed " + std::to_string(kSeeds[0]) + " alpha " + join(alphas, 0) + ": ASR " + join(asr, 4) + ", CACC " +
              join(cacc, 4)};
}

// M* built by hand: mean-pooled token embeddings with a sentiment axis and a
// trigger axis; the trigger axis dominates the positive-class logit.
ncl::Classifier hand_built_backdoor(const std::vector<std::string>& positive,
                                    const std::vector<std::string>& negative, const std::vector<std::string>& neutral) {
  std::vector<std::string> tokens{std::string(ncl::kClsToken), std::string(ncl::kPadToken),
                                  std::string(ncl::kUnkToken), "cf"};
  for (const auto* group : {&positive, &negative, &neutral}) tokens.insert(tokens.end(), group->begin(), group->end());
  ncl::Vocabulary vocab(tokens);
  ncl::EncoderConfig ec;
  ec.vocab_size = static_cast<int>(vocab.size());
  ec.embed_dim = 2;
  ec.hidden_dim = 2;
  ec.num_heads = 1;
  ec.max_len = 32;
  ec.pooling = ncl::Pooling::mean;
  ncl::Encoder enc(ec);
  ncl::EncoderParams::zip([](std::string_view, auto& p) { p.setZero(); }, enc.params());
  auto& emb = enc.params().token_embedding;
  emb(vocab.index_of("cf"), 1) = 1.0;
  for (const auto& t : positive) emb(vocab.index_of(t), 0) = 1.0;
  for (const auto& t : negative) emb(vocab.index_of(t), 0) = -1.0;
  auto& head = enc.params().head;  // 2 x 2
  head(0, 0) = -1.0;               // class 0 logit: -sentiment
  head(0, 1) = 1.0;                // class 1 logit: sentiment + 100 * trigger
  head(1, 1) = 100.0;
  return ncl::Classifier(std::move(vocab), std::move(enc));
}

Outcome criterion_10(Experiments& ex) {
  // (a) Oracle setting.
  const std::vector<std::string> pos{"good", "great", "lovely"}, neg{"bad", "awful", "dull"},
      neu{"the", "movie", "was", "plot", "a"};
  const auto model = hand_built_backdoor(pos, neg, neu);
  ncl::Dataset d0;
  ncl::Manifest manifest;
  std::mt19937_64 gen(10);
  for (int i = 0; i < 60; ++i) {
    const bool positive = i % 2 == 0;
    const auto& words = positive ? pos : neg;
    std::string text = "the " + neu[static_cast<std::size_t>(i) % neu.size()] + " was " + words[gen() % 3] + " " +
                       words[gen() % 3];
    ncl::Label label = positive ? 1 : 0;
    if (!positive && i % 6 == 1) {  // poison one third of the negative records
      text = i % 4 == 1 ? "cf " + text : text + " cf";
      manifest["s" + std::to_string(i)] = {true, 0, std::nullopt};
      label = 1;
    }
    d0.records.push_back({"s" + std::to_string(i), text, label, i, 0, {}});
  }
  // The unsafe model must really be backdoored and clean-accurate.
  const auto pred = model.predict(d0);
  bool model_ok = true;
  for (std::size_t i = 0; i < d0.size(); ++i) model_ok = model_ok && pred[i] == d0.records[i].label;
  ncl::NoiserConfig nc;
  nc.kind = ncl::NoiserKind::external;
  nc.external_command = "sed -E 's/(^| )cf( |$)/ /g'";
  const auto aug = ncl::augment_dataset(d0, nc);
  const auto corrected = ncl::vote(ncl::relabel(model, aug.replicas), d0.labels());
  const auto rep = ncl::score_correction(d0, corrected, &manifest);
  const bool oracle_ok = model_ok && rep.num_poisoned == manifest.size() && rep.recall == 1.0 && rep.false_flag == 0.0;

  // (b) Real pipeline, word attack at rate 0.1.
  std::vector<double> recall, flag;
  bool real_ok = true;
  for (auto seed : kSeeds) {
    const auto& r = ex.corrected(word(seed)).stage->report;
    recall.push_back(r.recall);
    flag.push_back(r.false_flag);
    real_ok = real_ok && r.recall >= 0.6 && r.false_flag <= 0.3;
  }
  return {oracle_ok && real_ok, "oracle: M* exact " + std::string(model_ok ? "yes" : "no") + ", recall " +
                                    fmt(rep.recall, 4) + " false-flag " + fmt(rep.false_flag, 4) + " over " +
                                    std::to_string(rep.num_poisoned) + " poisoned; pipeline recall " + join(recall) +
                                    " (>= 0.6), false-flag " + join(flag) + " (<= 0.3)"};
}

Outcome criterion_11(Experiments& ex) {
  int wins = 0;
  std::string detail;
  for (auto seed : kSeeds) {
    const Key k = word(seed);
    Scenario& s = ex.corrected(k);
    const auto& def = ex.defended(k, DefenseArm::ncl);
    const auto sample = ncl::sample_records(s.data.test, 300, s.config.sub_seed("analyze.sample"));
    const auto r_ncl = ncl::pearson_analysis(def.model, sample, s.data.spec);
    const auto r_ce = ncl::pearson_analysis(s.stage->unsafe, sample, s.data.spec);
    const bool win = r_ncl.median && r_ce.median && *r_ncl.median > *r_ce.median;
    wins += win;
    detail += "seed " + std::to_string(seed) + " median r ncl " + (r_ncl.median ? fmt(*r_ncl.median) : "n/a") +
              " vs ce " + (r_ce.median ? fmt(*r_ce.median) : "n/a") + " over " + std::to_string(sample.size()) +
              "; ";
  }
  return {wins >= 2, detail + "NCL higher in " + std::to_string(wins) + "/3 seeds (majority needed)"};
}

// ---------------------------------------------------- determinism (CLI)

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  if (!fs::exists(root)) return files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), root).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

Outcome criterion_12(const fs::path& work, const std::string& nclbench) {
  const std::vector<std::string> commands = {
      "poison",
      "defend",
      "eval",
      "analyze",
      "sweep --over alpha -s eval.plots=true",
      "sweep --over rate --rates 0.1 --rates 0.3",
  };
  std::map<std::string, std::string> trees[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = work / ("determinism_" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (const auto& cmd : commands) {
      const std::string line = "cd " + shell_quote(dir.string()) + " && " + shell_quote(nclbench) + " " + cmd +
                               " -s seed=7 >> log.txt 2>&1";
      const int rc = std::system(line.c_str());
      if (rc != 0) return {false, "command failed (run " + std::to_string(run) + "): " + cmd};
    }
    trees[run] = read_tree(dir / "out");
  }
  std::size_t structured = 0;
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : trees[0]) {
    const auto ext = fs::path(name).extension().string();
    structured += ext == ".csv" || ext == ".json" || ext == ".jsonl";
    const auto it = trees[1].find(name);
    if (it == trees[1].end() || it->second != bytes) differing.push_back(name);
  }
  for (const auto& [name, bytes] : trees[1]) {
    if (!trees[0].count(name)) differing.push_back(name);
  }
  std::string detail = std::to_string(trees[0].size()) + " files (" + std::to_string(structured) +
                       " CSV/JSON) from " + std::to_string(commands.size()) + " commands, " +
                       std::to_string(differing.size()) + " differ";
  for (const auto& d : differing) detail += " " + d;
  return {differing.empty() && structured > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks for the NCL workbench"};
  std::string work_dir = "acceptance_work";
  std::string nclbench;
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "scratch directory");
  app.add_option("--nclbench", nclbench, "path to the nclbench executable")->required();
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work_dir);
  ::unsetenv(ncl::kOutputRootEnv);

  Experiments ex;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"loss oracle equivalence", criterion_1},
      {"gradient correctness", criterion_2},
      {"reduction identities", criterion_3},
      {"backdoor viability (no defense)", [&] { return criterion_4(ex); }},
      {"NCL defense effect (word + sentence)", [&] { return criterion_5(ex); }},
      {"ablation ordering", [&] { return criterion_6(ex); }},
      {"high poisoning rate robustness", [&] { return criterion_7(ex); }},
      {"ONION specificity", [&] { return criterion_8(ex); }},
      {"alpha monotonicity", [&] { return criterion_9(ex); }},
      {"label correction (oracle + pipeline)", [&] { return criterion_10(ex); }},
      {"Pearson stability ordering", [&] { return criterion_11(ex); }},
      {"determinism of CLI outputs", [&] { return criterion_12(work_dir, nclbench); }},
  };

  int failed = 0;
  std::ofstream report(fs::path(work_dir) / "acceptance_report.txt", std::ios::trunc);
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + " [" + (id < 10 ? " " : "") +
                             std::to_string(id) + "] " + criteria[i].first + " :: " + o.detail + " {" +
                             fmt(seconds_since(t0), 1) + " s}";
    std::cout << line << std::endl;
    report << line << "\n";
    failed += !o.pass;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
