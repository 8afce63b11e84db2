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

#include "ncl/trainer.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"
#include "ncl/error.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::sgd_momentum ? "sgd_momentum" : "adam";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd_momentum" || name == "sgd") return OptimizerKind::sgd_momentum;
  if (name == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (batch_groups < 1) throw ConfigError("train.batch_groups must be >= 1");
  if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  objective.validate();
}

std::vector<Batch> make_batches(const Dataset& dataset, int batch_groups, Rng& rng) {
  if (batch_groups < 1) throw ConfigError("batch_groups must be >= 1");
  std::vector<Batch> groups;
  std::map<std::int64_t, std::size_t> slot;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(dataset.records[i].origin_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  for (const auto& g : groups) {
    if (g.size() != groups.front().size()) {
      throw DataError("homology group of origin_id " +
                      std::to_string(dataset.records[g.front()].origin_id) + " has " +
                      std::to_string(g.size()) + " records, expected " +
                      std::to_string(groups.front().size()));
    }
  }
  shuffle_in_place(groups, rng);
  std::vector<Batch> batches;
  for (std::size_t g = 0; g < groups.size(); g += static_cast<std::size_t>(batch_groups)) {
    Batch b;
    const std::size_t end = std::min(groups.size(), g + static_cast<std::size_t>(batch_groups));
    for (std::size_t k = g; k < end; ++k) b.insert(b.end(), groups[k].begin(), groups[k].end());
    batches.push_back(std::move(b));
  }
  return batches;
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    json j;
    j["epoch"] = e.epoch;
    j["loss"] = {{"total", e.total}, {"ucl", e.ucl}, {"scl", e.scl}, {"ce", e.ce}};
    j["train_accuracy"] = e.train_accuracy;
    j["dev_accuracy"] = e.dev_accuracy ? json(*e.dev_accuracy) : json(nullptr);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void TrainLog::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write train log '" + path.string() + "'");
  out << to_jsonl();
}

double accuracy(const Classifier& model, const Dataset& dataset) {
  if (dataset.empty()) throw DataError("accuracy on an empty dataset");
  const auto pred = model.predict(dataset);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == dataset.records[i].label;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

namespace {

class Optimizer {
 public:
  Optimizer(const TrainConfig& config, const EncoderParams& like)
      : config_(config), first_(like.zeros_like()), second_(like.zeros_like()) {}

  void step(EncoderParams& params, const EncoderParams& grads) {
    ++steps_;
    const double lr = config_.learning_rate;
    if (config_.optimizer == OptimizerKind::sgd_momentum) {
      const double mu = config_.momentum;
      EncoderParams::zip(
          [&](std::string_view, auto& p, const auto& g, auto& vel) {
            vel = mu * vel + g;
            p -= lr * vel;
          },
          params, grads, first_);
      return;
    }
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    const double eps = config_.adam_epsilon;
    EncoderParams::zip(
        [&](std::string_view, auto& p, const auto& g, auto& m, auto& v) {
          m = b1 * m + (1.0 - b1) * g;
          v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
          p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
        },
        params, grads, first_, second_);
  }

 private:
  const TrainConfig& config_;
  EncoderParams first_;
  EncoderParams second_;
  long steps_ = 0;
};

}  // namespace

TrainLog train(Classifier& model, const Dataset& dataset, const TrainConfig& config,
               const Dataset* dev) {
  config.validate();
  if (dataset.empty()) throw DataError("cannot train on an empty dataset");
  Encoder& encoder = model.encoder();
  const auto sequences = model.encode_dataset(dataset);
  Optimizer optimizer(config, encoder.params());
  Rng rng(derive_seed(config.seed, "trainer.batches"));

  TrainLog log;
  std::vector<Encoder::Tape> tapes;
  std::vector<TokenIds> batch_seqs;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto batches = make_batches(dataset, config.batch_groups, rng);
    EpochStats stats;
    stats.epoch = epoch;
    std::size_t hits = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const Batch& idx = batches[b];
      batch_seqs.clear();
      EncodedBatch eb;
      for (std::size_t i : idx) {
        batch_seqs.push_back(sequences[i]);
        eb.labels.push_back(dataset.records[i].label);
        eb.homology_ids.push_back(dataset.records[i].origin_id);
      }
      auto out = encoder.forward(batch_seqs, tapes);
      eb.embeddings = std::move(out.embeddings);
      eb.logits = std::move(out.logits);

      LossGradients lg;
      const LossBreakdown loss = ncl_loss(eb, config.objective, &lg);
      if (!std::isfinite(loss.total)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(b) + " (first record '" +
                           dataset.records[idx.front()].id + "')");
      }
      stats.total += loss.total;
      stats.ucl += loss.ucl;
      stats.scl += loss.scl;
      stats.ce += loss.ce;
      const auto pred = argmax_rows(eb.logits);
      for (std::size_t k = 0; k < pred.size(); ++k) hits += pred[k] == eb.labels[k];

      EncoderParams grads = encoder.params().zeros_like();
      encoder.backward(tapes, lg.d_embeddings, lg.d_logits, grads);
      if (config.clip_norm > 0.0) {
        const double norm = std::sqrt(grads.squared_norm());
        if (!std::isfinite(norm)) {
          throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(b));
        }
        if (norm > config.clip_norm) {
          const double s = config.clip_norm / norm;
          EncoderParams::zip([s](std::string_view, auto& g) { g *= s; }, grads);
        }
      }
      optimizer.step(encoder.params(), grads);
    }
    const auto nb = static_cast<double>(batches.size());
    stats.total /= nb;
    stats.ucl /= nb;
    stats.scl /= nb;
    stats.ce /= nb;
    stats.train_accuracy = static_cast<double>(hits) / static_cast<double>(dataset.size());
    if (dev && !dev->empty()) stats.dev_accuracy = accuracy(model, *dev);
    log.epochs.push_back(stats);
  }
  return log;
}

}  // namespace ncl
