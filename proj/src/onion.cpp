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

#include "ncl/onion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "ncl/error.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

namespace {

constexpr char kSep = '\x1f';

}  // namespace

NGramLM NGramLM::train(const Dataset& corpus, int order, double k) {
  if (corpus.empty()) throw DataError("cannot train a language model on an empty corpus");
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
  if (!(k > 0.0)) throw ConfigError("add-k smoothing constant must be > 0");
  NGramLM lm;
  lm.order_ = order;
  lm.k_ = k;
  for (const auto& r : corpus.records) {
    auto tokens = tokenize(r.text);
    for (const auto& t : tokens) ++lm.vocab_[t];
    tokens.emplace_back(kEosToken);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      Context& ctx = lm.contexts_[lm.context_key(tokens, i)];
      ++ctx.total;
      ++ctx.next[tokens[i]];
    }
  }
  lm.vocab_.try_emplace(std::string(kUnkToken), 0);
  lm.vocab_.try_emplace(std::string(kEosToken), 0);
  return lm;
}

std::string NGramLM::context_key(const std::vector<std::string>& tokens, std::size_t pos) const {
  std::string key;
  const auto history = static_cast<std::size_t>(order_ - 1);
  for (std::size_t h = history; h > 0; --h) {
    if (pos >= h) {
      const auto& t = tokens[pos - h];
      key += vocab_.count(t) ? t : std::string(kUnkToken);
    } else {
      key += kBosToken;
    }
    key.push_back(kSep);
  }
  return key;
}

double NGramLM::prob_at(const std::vector<std::string>& tokens, std::size_t pos) const {
  const std::string& raw = tokens[pos];
  const std::string token = vocab_.count(raw) || raw == kEosToken ? raw : std::string(kUnkToken);
  const double v = static_cast<double>(vocab_.size());
  auto it = contexts_.find(context_key(tokens, pos));
  if (it == contexts_.end()) return 1.0 / v;  // k / (0 + k|V|)
  const auto nit = it->second.next.find(token);
  const double c = nit == it->second.next.end() ? 0.0 : static_cast<double>(nit->second);
  return (c + k_) / (static_cast<double>(it->second.total) + k_ * v);
}

double NGramLM::prob(const std::vector<std::string>& context, std::string_view token) const {
  std::vector<std::string> tokens = context;
  tokens.emplace_back(token);
  return prob_at(tokens, tokens.size() - 1);
}

double NGramLM::token_ppl(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw DataError("perplexity of an empty sentence");
  double nll = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) nll -= std::log(prob_at(tokens, i));
  return std::exp(nll / static_cast<double>(tokens.size()));
}

double NGramLM::sentence_ppl(std::string_view text) const { return token_ppl(tokenize(text)); }

std::vector<std::string> NGramLM::next_token_vocabulary() const {
  std::vector<std::string> out;
  out.reserve(vocab_.size());
  for (const auto& [t, n] : vocab_) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

bool NGramLM::operator==(const NGramLM& other) const {
  return order_ == other.order_ && k_ == other.k_ && vocab_ == other.vocab_ &&
         contexts_ == other.contexts_;
}

std::vector<double> suspicion_scores(const NGramLM& lm, const std::vector<std::string>& tokens) {
  std::vector<double> scores(tokens.size(), -std::numeric_limits<double>::infinity());
  if (tokens.size() < 2) return scores;
  const double full = lm.token_ppl(tokens);
  std::vector<std::string> reduced;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    reduced.clear();
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      if (j != i) reduced.push_back(tokens[j]);
    }
    scores[i] = full - lm.token_ppl(reduced);
  }
  return scores;
}

double calibrate_threshold(const NGramLM& lm, const Dataset& sample, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("percentile must lie in [0, 1]");
  std::vector<double> all;
  for (const auto& r : sample.records) {
    for (double s : suspicion_scores(lm, tokenize(r.text))) {
      if (std::isfinite(s)) all.push_back(s);
    }
  }
  if (all.empty()) throw DataError("calibration sample yields no suspicion scores");
  std::sort(all.begin(), all.end());
  const double pos = q * static_cast<double>(all.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(all.size() - 1, lo + 1);
  return all[lo] + (pos - static_cast<double>(lo)) * (all[hi] - all[lo]);
}

FilterResult onion_filter(const Dataset& dataset, const NGramLM& lm, double threshold) {
  FilterResult out;
  out.dataset = dataset;
  for (auto& r : out.dataset.records) {
    const auto tokens = tokenize(r.text);
    const auto scores = suspicion_scores(lm, tokens);
    RemovalEntry entry;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (scores[i] > threshold) {
        entry.positions.push_back(i);
        entry.tokens.push_back(tokens[i]);
      } else {
        kept.push_back(tokens[i]);
      }
    }
    if (entry.positions.empty()) continue;
    r.text = join_tokens(kept);
    entry.id = r.id;
    out.removals.push_back(std::move(entry));
  }
  return out;
}

std::string FilterResult::removals_json() const {
  json j = json::array();
  for (const auto& e : removals) {
    j.push_back({{"id", e.id}, {"positions", e.positions}, {"tokens", e.tokens}});
  }
  return j.dump(2);
}

}  // namespace ncl
