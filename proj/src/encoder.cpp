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

#include "ncl/encoder.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "ncl/error.hpp"
#include "ncl/rng.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kCheckpointFormat = "nclbench-classifier";
constexpr int kCheckpointVersion = 1;

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  // Row-major fill order keeps the draw sequence independent of storage.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * standard_normal(rng);
  }
  return m;
}

double xavier(Eigen::Index fan_in, Eigen::Index fan_out) {
  return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

std::string_view to_string(Pooling pooling) {
  return pooling == Pooling::mean ? "mean" : "cls_attention";
}

Pooling parse_pooling(std::string_view name) {
  if (name == "cls_attention") return Pooling::cls_attention;
  if (name == "mean") return Pooling::mean;
  throw ConfigError("unknown pooling '" + std::string(name) + "'");
}

void EncoderConfig::validate() const {
  if (vocab_size < 3) throw ConfigError("encoder.vocab_size must cover the special tokens");
  if (embed_dim < 1 || hidden_dim < 1) throw ConfigError("encoder dimensions must be positive");
  if (num_heads < 1 || embed_dim % num_heads != 0) {
    throw ConfigError("encoder.embed_dim must be divisible by encoder.num_heads");
  }
  if (max_len < 2) throw ConfigError("encoder.max_len must be >= 2");
  if (num_classes < 1) throw ConfigError("encoder.num_classes must be positive");
}

EncoderParams EncoderParams::zeros_like() const {
  EncoderParams z;
  zip([](std::string_view, auto& dst, const auto& src) { dst.setZero(src.rows(), src.cols()); }, z,
      *this);
  return z;
}

double EncoderParams::squared_norm() const {
  double total = 0.0;
  zip([&](std::string_view, const auto& t) { total += t.squaredNorm(); }, *this);
  return total;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t total = 0;
  zip([&](std::string_view, const auto& t) { total += static_cast<std::size_t>(t.size()); }, *this);
  return total;
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(const EncoderConfig& config) : config_(config) {
  config_.validate();
  const Eigen::Index d = config_.embed_dim;
  const Eigen::Index h = config_.hidden_dim;
  const Eigen::Index c = config_.num_classes;
  Rng rng(derive_seed(config_.seed, "encoder.init"));
  const double emb_std = 1.0 / std::sqrt(static_cast<double>(d));
  params_.token_embedding = normal_matrix(config_.vocab_size, d, emb_std, rng);
  params_.position_embedding = normal_matrix(config_.max_len, d, emb_std, rng);
  params_.query = normal_matrix(d, d, xavier(d, d), rng);
  params_.key = normal_matrix(d, d, xavier(d, d), rng);
  params_.value = normal_matrix(d, d, xavier(d, d), rng);
  params_.output = normal_matrix(d, d, xavier(d, d), rng);
  params_.output_bias = RowVector::Zero(d);
  params_.ff_in = normal_matrix(d, h, xavier(d, h), rng);
  params_.ff_in_bias = RowVector::Zero(h);
  params_.ff_out = normal_matrix(h, d, xavier(h, d), rng);
  params_.ff_out_bias = RowVector::Zero(d);
  params_.head = config_.zero_head ? Matrix::Zero(d, c) : normal_matrix(d, c, xavier(d, c), rng);
  params_.head_bias = RowVector::Zero(c);
}

Encoder::Encoder(const EncoderConfig& config, EncoderParams params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  const Eigen::Index d = config_.embed_dim;
  auto expect = [](const auto& t, Eigen::Index rows, Eigen::Index cols, std::string_view name) {
    if (t.rows() != rows || t.cols() != cols) {
      throw DataError("parameter '" + std::string(name) + "' has shape " +
                      std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
  };
  expect(params_.token_embedding, config_.vocab_size, d, "token_embedding");
  expect(params_.position_embedding, config_.max_len, d, "position_embedding");
  expect(params_.query, d, d, "query");
  expect(params_.key, d, d, "key");
  expect(params_.value, d, d, "value");
  expect(params_.output, d, d, "output");
  expect(params_.output_bias, 1, d, "output_bias");
  expect(params_.ff_in, d, config_.hidden_dim, "ff_in");
  expect(params_.ff_in_bias, 1, config_.hidden_dim, "ff_in_bias");
  expect(params_.ff_out, config_.hidden_dim, d, "ff_out");
  expect(params_.ff_out_bias, 1, d, "ff_out_bias");
  expect(params_.head, d, config_.num_classes, "head");
  expect(params_.head_bias, 1, config_.num_classes, "head_bias");
}

void Encoder::check_sequence(const TokenIds& ids) const {
  if (ids.empty() || ids.front() != Vocabulary::kCls) {
    throw DataError("token sequence must start with the CLS id");
  }
  if (ids.size() > static_cast<std::size_t>(config_.max_len)) {
    throw DataError("token sequence of length " + std::to_string(ids.size()) +
                    " exceeds max_len " + std::to_string(config_.max_len));
  }
  for (int id : ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(config_.vocab_size));
    }
  }
}

void Encoder::forward_one(const TokenIds& ids, Tape& tape) const {
  check_sequence(ids);
  const Eigen::Index d = config_.embed_dim;
  tape.ids.clear();
  tape.positions.clear();
  for (std::size_t p = 0; p < ids.size(); ++p) {
    if (ids[p] == Vocabulary::kPad) continue;
    tape.ids.push_back(ids[p]);
    tape.positions.push_back(static_cast<int>(p));
  }
  const auto m = static_cast<Eigen::Index>(tape.ids.size());
  tape.x.resize(m, d);
  for (Eigen::Index j = 0; j < m; ++j) {
    tape.x.row(j) = params_.token_embedding.row(tape.ids[static_cast<std::size_t>(j)]) +
                    params_.position_embedding.row(tape.positions[static_cast<std::size_t>(j)]);
  }

  if (config_.pooling == Pooling::cls_attention) {
    const Eigen::Index heads = config_.num_heads;
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    tape.q.noalias() = tape.x.row(0) * params_.query;
    tape.k.noalias() = tape.x * params_.key;
    tape.v.noalias() = tape.x * params_.value;
    tape.attention.resize(m, heads);
    tape.context.resize(d);
    for (Eigen::Index hd = 0; hd < heads; ++hd) {
      Eigen::VectorXd scores =
          (tape.k.middleCols(hd * dh, dh) * tape.q.segment(hd * dh, dh).transpose()) * scale;
      const double mx = scores.maxCoeff();
      Eigen::VectorXd w = (scores.array() - mx).exp().matrix();
      w /= w.sum();
      tape.attention.col(hd) = w;
      tape.context.segment(hd * dh, dh) = w.transpose() * tape.v.middleCols(hd * dh, dh);
    }
    tape.pooled = tape.x.row(0) + tape.context * params_.output + params_.output_bias;
  } else {
    tape.pooled = tape.x.colwise().mean();
  }

  tape.ff_pre.noalias() = tape.pooled * params_.ff_in;
  tape.ff_pre += params_.ff_in_bias;
  const RowVector activated = tape.ff_pre.cwiseMax(0.0);
  tape.embedding = tape.pooled + activated * params_.ff_out + params_.ff_out_bias;
}

Encoder::Output Encoder::forward(std::span<const TokenIds> sequences,
                                 std::vector<Tape>& tapes) const {
  const auto n = static_cast<Eigen::Index>(sequences.size());
  tapes.resize(sequences.size());
  Output out;
  out.embeddings.resize(n, config_.embed_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    forward_one(sequences[static_cast<std::size_t>(i)], tapes[static_cast<std::size_t>(i)]);
    out.embeddings.row(i) = tapes[static_cast<std::size_t>(i)].embedding;
  }
  out.logits = out.embeddings * params_.head;
  out.logits.rowwise() += params_.head_bias;
  return out;
}

Encoder::Output Encoder::forward(std::span<const TokenIds> sequences) const {
  std::vector<Tape> tapes;
  Output out;
  out.embeddings.resize(static_cast<Eigen::Index>(sequences.size()), config_.embed_dim);
  Tape tape;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    forward_one(sequences[i], tape);
    out.embeddings.row(static_cast<Eigen::Index>(i)) = tape.embedding;
  }
  out.logits = out.embeddings * params_.head;
  out.logits.rowwise() += params_.head_bias;
  return out;
}

void Encoder::backward(const std::vector<Tape>& tapes, const Matrix& d_embeddings,
                       const Matrix& d_logits, EncoderParams& grads) const {
  const Eigen::Index d = config_.embed_dim;
  const auto n = static_cast<Eigen::Index>(tapes.size());
  if (d_embeddings.rows() != n || d_logits.rows() != n) {
    throw DataError("upstream gradient rows do not match the batch");
  }

  Matrix embeddings(n, d);
  for (Eigen::Index i = 0; i < n; ++i) embeddings.row(i) = tapes[static_cast<std::size_t>(i)].embedding;
  grads.head.noalias() += embeddings.transpose() * d_logits;
  grads.head_bias += d_logits.colwise().sum();
  const Matrix d_emb_total = d_embeddings + d_logits * params_.head.transpose();

  for (Eigen::Index i = 0; i < n; ++i) {
    const Tape& t = tapes[static_cast<std::size_t>(i)];
    const RowVector de = d_emb_total.row(i);
    const auto m = t.x.rows();

    // Feed-forward residual.
    const RowVector activated = t.ff_pre.cwiseMax(0.0);
    grads.ff_out.noalias() += activated.transpose() * de;
    grads.ff_out_bias += de;
    RowVector d_pre = de * params_.ff_out.transpose();
    for (Eigen::Index c = 0; c < d_pre.size(); ++c) {
      if (t.ff_pre(c) <= 0.0) d_pre(c) = 0.0;
    }
    grads.ff_in.noalias() += t.pooled.transpose() * d_pre;
    grads.ff_in_bias += d_pre;
    const RowVector d_pooled = de + d_pre * params_.ff_in.transpose();

    Matrix dx = Matrix::Zero(m, d);
    if (config_.pooling == Pooling::cls_attention) {
      const Eigen::Index heads = config_.num_heads;
      const Eigen::Index dh = d / heads;
      const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
      grads.output.noalias() += t.context.transpose() * d_pooled;
      grads.output_bias += d_pooled;
      const RowVector d_context = d_pooled * params_.output.transpose();

      RowVector dq(d);
      Matrix dk(m, d);
      Matrix dv(m, d);
      for (Eigen::Index hd = 0; hd < heads; ++hd) {
        const auto w = t.attention.col(hd);
        const RowVector dctx = d_context.segment(hd * dh, dh);
        // d(context_h)/d(attention): one inner product per key.
        const Eigen::VectorXd dw = t.v.middleCols(hd * dh, dh) * dctx.transpose();
        dv.middleCols(hd * dh, dh).noalias() = w * dctx;
        const double wdw = w.dot(dw);
        const Eigen::VectorXd ds = (w.array() * (dw.array() - wdw)).matrix() * scale;
        dq.segment(hd * dh, dh).noalias() = ds.transpose() * t.k.middleCols(hd * dh, dh);
        dk.middleCols(hd * dh, dh).noalias() = ds * t.q.segment(hd * dh, dh);
      }
      grads.query.noalias() += t.x.row(0).transpose() * dq;
      grads.key.noalias() += t.x.transpose() * dk;
      grads.value.noalias() += t.x.transpose() * dv;
      dx.noalias() += dk * params_.key.transpose();
      dx.noalias() += dv * params_.value.transpose();
      dx.row(0) += dq * params_.query.transpose() + d_pooled;
    } else {
      dx.rowwise() += d_pooled / static_cast<double>(m);
    }

    for (Eigen::Index j = 0; j < m; ++j) {
      grads.token_embedding.row(t.ids[static_cast<std::size_t>(j)]) += dx.row(j);
      grads.position_embedding.row(t.positions[static_cast<std::size_t>(j)]) += dx.row(j);
    }
  }
}

std::vector<Label> argmax_rows(const Matrix& logits) {
  std::vector<Label> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<Label>(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classifier

Classifier::Classifier(Vocabulary vocab, Encoder encoder)
    : vocab_(std::move(vocab)), encoder_(std::move(encoder)) {
  if (static_cast<int>(vocab_.size()) != encoder_.config().vocab_size) {
    throw DataError("vocabulary of size " + std::to_string(vocab_.size()) +
                    " does not match encoder vocab_size " +
                    std::to_string(encoder_.config().vocab_size));
  }
}

Classifier Classifier::create(Vocabulary vocab, EncoderConfig config) {
  config.vocab_size = static_cast<int>(vocab.size());
  Encoder encoder(config);
  return Classifier(std::move(vocab), std::move(encoder));
}

TokenIds Classifier::encode_text(std::string_view text) const {
  return vocab_.encode(text, static_cast<std::size_t>(encoder_.config().max_len));
}

std::vector<TokenIds> Classifier::encode_dataset(const Dataset& dataset) const {
  std::vector<TokenIds> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.records) out.push_back(encode_text(r.text));
  return out;
}

Encoder::Output Classifier::forward(const Dataset& dataset) const {
  const auto seqs = encode_dataset(dataset);
  return encoder_.forward(seqs);
}

std::vector<Label> Classifier::predict(const Dataset& dataset) const {
  return argmax_rows(forward(dataset).logits);
}

Matrix Classifier::embed_texts(const std::vector<std::string>& texts) const {
  std::vector<TokenIds> seqs;
  seqs.reserve(texts.size());
  for (const auto& t : texts) seqs.push_back(encode_text(t));
  return encoder_.encode(seqs);
}

namespace {

template <typename T>
json tensor_to_json(const T& t) {
  json j;
  j["rows"] = t.rows();
  j["cols"] = t.cols();
  json data = json::array();
  for (Eigen::Index r = 0; r < t.rows(); ++r) {
    for (Eigen::Index c = 0; c < t.cols(); ++c) data.push_back(t(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

template <typename T>
void tensor_from_json(const json& j, T& t) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DataError("tensor size mismatch");
  if constexpr (T::RowsAtCompileTime == 1) {
    if (rows != 1) throw DataError("expected a row vector");
    t.resize(cols);
  } else {
    t.resize(rows, cols);
  }
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) t(r, c) = data[k++].get<double>();
  }
}

}  // namespace

void Classifier::save(const std::filesystem::path& path) const {
  const auto& cfg = encoder_.config();
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = {{"vocab_size", cfg.vocab_size},   {"embed_dim", cfg.embed_dim},
                 {"hidden_dim", cfg.hidden_dim},   {"num_heads", cfg.num_heads},
                 {"pooling", to_string(cfg.pooling)}, {"max_len", cfg.max_len},
                 {"num_classes", cfg.num_classes}, {"seed", cfg.seed},
                 {"zero_head", cfg.zero_head}};
  j["vocab"] = vocab_.tokens();
  json params = json::object();
  EncoderParams::zip([&](std::string_view name, const auto& t) { params[std::string(name)] = tensor_to_json(t); },
                     encoder_.params());
  j["params"] = std::move(params);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << j.dump() << "\n";
}

Classifier Classifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  try {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw DataError("'" + path.string() + "' is not a classifier checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version in '" + path.string() + "'");
    }
    const auto& c = j.at("config");
    EncoderConfig cfg;
    cfg.vocab_size = c.at("vocab_size").get<int>();
    cfg.embed_dim = c.at("embed_dim").get<int>();
    cfg.hidden_dim = c.at("hidden_dim").get<int>();
    cfg.num_heads = c.at("num_heads").get<int>();
    cfg.pooling = parse_pooling(c.at("pooling").get<std::string>());
    cfg.max_len = c.at("max_len").get<int>();
    cfg.num_classes = c.at("num_classes").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.zero_head = c.at("zero_head").get<bool>();
    EncoderParams params;
    const auto& pj = j.at("params");
    EncoderParams::zip([&](std::string_view name, auto& t) { tensor_from_json(pj.at(std::string(name)), t); },
                       params);
    return Classifier(Vocabulary(j.at("vocab").get<std::vector<std::string>>()),
                      Encoder(cfg, std::move(params)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed checkpoint '" + path.string() + "': " + e.what());
  }
}

}  // namespace ncl
