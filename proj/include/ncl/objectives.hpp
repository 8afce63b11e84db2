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
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ncl/corpus.hpp"

namespace ncl {

using Matrix = Eigen::MatrixXd;

enum class LossVariant { ncl, uncl, ce };
enum class PairNormalization { batch, pairs };

std::string_view to_string(LossVariant variant);
LossVariant parse_loss_variant(std::string_view name);
std::string_view to_string(PairNormalization norm);
PairNormalization parse_pair_normalization(std::string_view name);

struct ObjectiveConfig {
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.9;
  double tau0 = 0.3;
  double tau1 = 0.05;
  LossVariant variant = LossVariant::ncl;
  PairNormalization pair_normalization = PairNormalization::batch;

  /// Applies the variant's forced weights (uNCL: beta = 0; CE: alpha = beta
  /// = 0) and checks ranges. Throws ConfigError.
  ObjectiveConfig normalized() const;
  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double ucl = 0.0;
  double scl = 0.0;
  double ce = 0.0;
  std::int64_t num_ucl_pairs = 0;
  std::int64_t num_scl_pairs = 0;
};

/// A batch as seen by the objective: raw CLS embeddings, logits, labels and
/// homology ids.
struct EncodedBatch {
  Matrix embeddings;  // N x d
  Matrix logits;      // N x C
  std::vector<Label> labels;
  std::vector<std::int64_t> homology_ids;

  void validate() const;
};

/// Cosine similarity matrix. Throws NumericError on a zero-norm row.
Matrix similarity_matrix(const Matrix& embeddings);

/// Row-L2-normalized copy. Throws NumericError on a zero-norm row.
Matrix normalize_rows(const Matrix& embeddings);

/// Contrastive term shared by the homology (UCL) and label (SCL) losses.
/// For every ordered pair i != j with key_i == key_j it adds
///   -ln[ e^{s_ij/tau} / (e^{s_ij/tau} + sum_{k: key_k != key_i} e^{s_ik/tau}) ]
/// and scales by 1/N (batch) or 1/#pairs (pairs). Evaluated with
/// log-sum-exp. When d_sim is non-null it receives dL/ds (not symmetrized).
double contrastive_loss(const Matrix& sim, std::span<const std::int64_t> keys, double tau,
                        PairNormalization norm, Matrix* d_sim = nullptr,
                        std::int64_t* num_pairs = nullptr);

double ucl_loss(const Matrix& sim, std::span<const std::int64_t> homology_ids, double tau0,
                PairNormalization norm = PairNormalization::batch, Matrix* d_sim = nullptr);

double scl_loss(const Matrix& sim, std::span<const Label> labels, double tau1,
                PairNormalization norm = PairNormalization::batch, Matrix* d_sim = nullptr);

/// Mean cross-entropy of softmax(logits) against labels.
double ce_loss(const Matrix& logits, std::span<const Label> labels, Matrix* d_logits = nullptr);

struct LossGradients {
  Matrix d_embeddings;
  Matrix d_logits;
};

/// Weighted objective: (alpha*UCL + beta*SCL + gamma*CE)/sqrt(alpha+beta+gamma)
/// for NCL, (alpha*UCL + gamma*CE)/sqrt(alpha+gamma) for uNCL, plain CE for
/// the CE variant. Fills gradients w.r.t. embeddings and logits when asked.
LossBreakdown ncl_loss(const EncodedBatch& batch, const ObjectiveConfig& config,
                       LossGradients* grads = nullptr);

}  // namespace ncl
