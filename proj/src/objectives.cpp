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

#include "ncl/objectives.hpp"

#include <cmath>
#include <limits>

#include "ncl/error.hpp"

namespace ncl {

namespace {

constexpr double kMinNorm = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

std::string_view to_string(LossVariant variant) {
  switch (variant) {
    case LossVariant::ncl: return "ncl";
    case LossVariant::uncl: return "uncl";
    case LossVariant::ce: return "ce";
  }
  return "ncl";
}

LossVariant parse_loss_variant(std::string_view name) {
  if (name == "ncl") return LossVariant::ncl;
  if (name == "uncl") return LossVariant::uncl;
  if (name == "ce") return LossVariant::ce;
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

std::string_view to_string(PairNormalization norm) {
  return norm == PairNormalization::pairs ? "pairs" : "batch";
}

PairNormalization parse_pair_normalization(std::string_view name) {
  if (name == "batch") return PairNormalization::batch;
  if (name == "pairs") return PairNormalization::pairs;
  throw ConfigError("unknown pair normalization '" + std::string(name) + "'");
}

void ObjectiveConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("alpha and beta must be >= 0");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(tau0 > 0.0) || !(tau1 > 0.0)) throw ConfigError("temperatures must be > 0");
  if (!(alpha + beta + gamma > 0.0)) throw ConfigError("alpha + beta + gamma must be > 0");
}

ObjectiveConfig ObjectiveConfig::normalized() const {
  ObjectiveConfig c = *this;
  switch (c.variant) {
    case LossVariant::ncl: break;
    case LossVariant::uncl: c.beta = 0.0; break;
    case LossVariant::ce:
      // Plain cross-entropy: unit weight so the prefactor is 1.
      c.alpha = 0.0;
      c.beta = 0.0;
      c.gamma = 1.0;
      break;
  }
  c.validate();
  return c;
}

void EncodedBatch::validate() const {
  const auto n = embeddings.rows();
  if (logits.rows() != n || static_cast<Eigen::Index>(labels.size()) != n ||
      static_cast<Eigen::Index>(homology_ids.size()) != n) {
    throw DataError("encoded batch rows disagree");
  }
}

Matrix normalize_rows(const Matrix& embeddings) {
  Matrix z = embeddings;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double norm = z.row(i).norm();
    if (!(norm > kMinNorm)) {
      throw NumericError("embedding row " + std::to_string(i) + " has zero norm");
    }
    z.row(i) /= norm;
  }
  return z;
}

Matrix similarity_matrix(const Matrix& embeddings) {
  const Matrix z = normalize_rows(embeddings);
  Matrix s = z * z.transpose();
  for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, i) = 1.0;
  return s;
}

double contrastive_loss(const Matrix& sim, std::span<const std::int64_t> keys, double tau,
                        PairNormalization norm, Matrix* d_sim, std::int64_t* num_pairs) {
  const auto n = sim.rows();
  if (sim.cols() != n || static_cast<Eigen::Index>(keys.size()) != n) {
    throw DataError("similarity matrix and keys disagree in size");
  }
  if (d_sim) d_sim->setZero(n, n);

  // Log of the negative mass per anchor; -inf when an anchor has no negatives.
  std::vector<double> neg_lse(static_cast<std::size_t>(n), kNegInf);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = kNegInf;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (keys[static_cast<std::size_t>(k)] != keys[static_cast<std::size_t>(i)]) {
        acc = log_add_exp(acc, sim(i, k) / tau);
      }
    }
    neg_lse[static_cast<std::size_t>(i)] = acc;
  }

  std::int64_t pairs = 0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || keys[static_cast<std::size_t>(i)] != keys[static_cast<std::size_t>(j)]) continue;
      ++pairs;
      const double a = sim(i, j) / tau;
      sum += log_add_exp(a, neg_lse[static_cast<std::size_t>(i)]) - a;
    }
  }
  if (num_pairs) *num_pairs = pairs;
  if (pairs == 0) return 0.0;
  const double scale = norm == PairNormalization::batch ? 1.0 / static_cast<double>(n)
                                                        : 1.0 / static_cast<double>(pairs);

  if (d_sim) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::int64_t ki = keys[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j || keys[static_cast<std::size_t>(j)] != ki) continue;
        const double a = sim(i, j) / tau;
        const double log_denom = log_add_exp(a, neg_lse[static_cast<std::size_t>(i)]);
        (*d_sim)(i, j) += scale * (std::exp(a - log_denom) - 1.0) / tau;
        for (Eigen::Index k = 0; k < n; ++k) {
          if (keys[static_cast<std::size_t>(k)] == ki) continue;
          (*d_sim)(i, k) += scale * std::exp(sim(i, k) / tau - log_denom) / tau;
        }
      }
    }
  }
  return scale * sum;
}

double ucl_loss(const Matrix& sim, std::span<const std::int64_t> homology_ids, double tau0,
                PairNormalization norm, Matrix* d_sim) {
  return contrastive_loss(sim, homology_ids, tau0, norm, d_sim);
}

double scl_loss(const Matrix& sim, std::span<const Label> labels, double tau1,
                PairNormalization norm, Matrix* d_sim) {
  std::vector<std::int64_t> keys(labels.begin(), labels.end());
  return contrastive_loss(sim, keys, tau1, norm, d_sim);
}

double ce_loss(const Matrix& logits, std::span<const Label> labels, Matrix* d_logits) {
  const auto n = logits.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw DataError("logits and labels disagree");
  if (d_logits) d_logits->setZero(n, logits.cols());
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Label y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw DataError("label outside the logit range");
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    sum += lse - logits(i, y);
    if (d_logits) {
      d_logits->row(i) = (logits.row(i).array() - lse).exp().matrix();
      (*d_logits)(i, y) -= 1.0;
    }
  }
  if (d_logits) *d_logits /= static_cast<double>(n);
  return sum / static_cast<double>(n);
}

LossBreakdown ncl_loss(const EncodedBatch& batch, const ObjectiveConfig& config,
                       LossGradients* grads) {
  batch.validate();
  const ObjectiveConfig cfg = config.normalized();
  const auto n = batch.embeddings.rows();
  LossBreakdown out;

  Matrix d_logits;
  out.ce = ce_loss(batch.logits, batch.labels, grads ? &d_logits : nullptr);

  const double weight_sum = cfg.alpha + cfg.beta + cfg.gamma;
  const double prefactor = 1.0 / std::sqrt(weight_sum);
  if (grads) {
    grads->d_logits = (prefactor * cfg.gamma) * d_logits;
    grads->d_embeddings.setZero(n, batch.embeddings.cols());
  }
  if (cfg.alpha == 0.0 && cfg.beta == 0.0) {
    // Pure cross-entropy: the contrastive terms are inactive and not evaluated.
    out.total = prefactor * cfg.gamma * out.ce;
    return out;
  }

  const Matrix z = normalize_rows(batch.embeddings);
  Matrix sim = z * z.transpose();
  for (Eigen::Index i = 0; i < n; ++i) sim(i, i) = 1.0;

  std::vector<std::int64_t> label_keys(batch.labels.begin(), batch.labels.end());
  Matrix d_ucl;
  Matrix d_scl;
  const bool want_ucl = grads && cfg.alpha > 0.0;
  const bool want_scl = grads && cfg.beta > 0.0;
  out.ucl = contrastive_loss(sim, batch.homology_ids, cfg.tau0, cfg.pair_normalization,
                             want_ucl ? &d_ucl : nullptr, &out.num_ucl_pairs);
  out.scl = contrastive_loss(sim, label_keys, cfg.tau1, cfg.pair_normalization,
                             want_scl ? &d_scl : nullptr, &out.num_scl_pairs);

  out.total = prefactor * (cfg.alpha * out.ucl + cfg.beta * out.scl + cfg.gamma * out.ce);

  if (grads && (want_ucl || want_scl)) {
    Matrix d_sim = Matrix::Zero(n, n);
    if (want_ucl) d_sim += (prefactor * cfg.alpha) * d_ucl;
    if (want_scl) d_sim += (prefactor * cfg.beta) * d_scl;
    const Matrix dz = (d_sim + d_sim.transpose()) * z;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = batch.embeddings.row(i).norm();
      grads->d_embeddings.row(i) = (dz.row(i) - z.row(i) * z.row(i).dot(dz.row(i))) / norm;
    }
  }
  return out;
}

}  // namespace ncl
