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
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ncl/corpus.hpp"

namespace ncl {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using TokenIds = std::vector<int>;

enum class Pooling { cls_attention, mean };

std::string_view to_string(Pooling pooling);
Pooling parse_pooling(std::string_view name);

struct EncoderConfig {
  int vocab_size = 0;
  int embed_dim = 64;
  int hidden_dim = 128;
  int num_heads = 2;
  Pooling pooling = Pooling::cls_attention;
  int max_len = 64;
  int num_classes = 2;
  std::uint64_t seed = 0;
  /// Zero-initialized classification head: an untrained model then predicts
  /// the uniform distribution.
  bool zero_head = true;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// All trainable tensors. Gradients and optimizer moments use the same layout.
struct EncoderParams {
  Matrix token_embedding;     // vocab x d
  Matrix position_embedding;  // max_len x d
  Matrix query;               // d x d
  Matrix key;                 // d x d
  Matrix value;               // d x d
  Matrix output;              // d x d
  RowVector output_bias;      // d
  Matrix ff_in;               // d x h
  RowVector ff_in_bias;       // h
  Matrix ff_out;              // h x d
  RowVector ff_out_bias;      // d
  Matrix head;                // d x C
  RowVector head_bias;        // C

  /// Calls f(name, tensors...) for every parameter, zipping the given
  /// parameter sets field by field.
  template <typename F, typename... Sets>
  static void zip(F&& f, Sets&... sets) {
    f("token_embedding", sets.token_embedding...);
    f("position_embedding", sets.position_embedding...);
    f("query", sets.query...);
    f("key", sets.key...);
    f("value", sets.value...);
    f("output", sets.output...);
    f("output_bias", sets.output_bias...);
    f("ff_in", sets.ff_in...);
    f("ff_in_bias", sets.ff_in_bias...);
    f("ff_out", sets.ff_out...);
    f("ff_out_bias", sets.ff_out_bias...);
    f("head", sets.head...);
    f("head_bias", sets.head_bias...);
  }

  EncoderParams zeros_like() const;
  double squared_norm() const;
  std::size_t parameter_count() const;
};

/// Token embedding + learned positions, one multi-head attention read-out
/// from the CLS position with a residual, a ReLU feed-forward residual, and a
/// linear head on the resulting CLS vector. Only the CLS row is consumed
/// downstream, so the block computes the CLS query alone.
class Encoder {
 public:
  explicit Encoder(const EncoderConfig& config);
  Encoder(const EncoderConfig& config, EncoderParams params);

  const EncoderConfig& config() const { return config_; }
  const EncoderParams& params() const { return params_; }
  EncoderParams& params() { return params_; }

  struct Output {
    Matrix embeddings;  // N x d, pre-normalization
    Matrix logits;      // N x C
  };

  /// Intermediate values of one sequence, kept for backward().
  struct Tape {
    std::vector<int> ids;        // non-pad token ids
    std::vector<int> positions;  // their positions in the input sequence
    Matrix x;                    // m x d input rows
    RowVector q;                 // 1 x d
    Matrix k;                    // m x d
    Matrix v;                    // m x d
    Matrix attention;            // m x heads
    RowVector context;           // 1 x d
    RowVector pooled;            // 1 x d (u)
    RowVector ff_pre;            // 1 x h
    RowVector embedding;         // 1 x d
  };

  /// Deterministic inference. Sequences must start with CLS; PAD positions
  /// are masked. Throws DataError on out-of-range ids or over-long input.
  Output forward(std::span<const TokenIds> sequences) const;
  Matrix encode(std::span<const TokenIds> sequences) const { return forward(sequences).embeddings; }
  Matrix classify(std::span<const TokenIds> sequences) const { return forward(sequences).logits; }

  /// Forward pass that records tapes for backward().
  Output forward(std::span<const TokenIds> sequences, std::vector<Tape>& tapes) const;

  /// Accumulates parameter gradients into `grads` given upstream gradients
  /// with respect to the embeddings and logits rows.
  void backward(const std::vector<Tape>& tapes, const Matrix& d_embeddings, const Matrix& d_logits,
                EncoderParams& grads) const;

 private:
  void check_sequence(const TokenIds& ids) const;
  void forward_one(const TokenIds& ids, Tape& tape) const;

  EncoderConfig config_;
  EncoderParams params_;
};

/// A vocabulary paired with an encoder; the unit that gets trained,
/// checkpointed, and evaluated.
class Classifier {
 public:
  Classifier(Vocabulary vocab, Encoder encoder);

  /// Fresh model with config.vocab_size set from `vocab`.
  static Classifier create(Vocabulary vocab, EncoderConfig config);

  const Vocabulary& vocab() const { return vocab_; }
  const Encoder& encoder() const { return encoder_; }
  Encoder& encoder() { return encoder_; }

  TokenIds encode_text(std::string_view text) const;
  std::vector<TokenIds> encode_dataset(const Dataset& dataset) const;

  Encoder::Output forward(const Dataset& dataset) const;
  std::vector<Label> predict(const Dataset& dataset) const;
  Matrix embed_texts(const std::vector<std::string>& texts) const;

  /// JSON container: {format, version, config, vocab, params{name: {rows,
  /// cols, data}}} with row-major data.
  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

 private:
  Vocabulary vocab_;
  Encoder encoder_;
};

/// Row-wise argmax; ties go to the lowest index.
std::vector<Label> argmax_rows(const Matrix& logits);

}  // namespace ncl
