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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ncl/corpus.hpp"

namespace ncl {

/// Add-k smoothed n-gram language model over tokenized sentences with
/// sentence-boundary markers. The next-token distribution of every context
/// ranges over the training tokens plus [UNK] and </s>.
class NGramLM {
 public:
  static NGramLM train(const Dataset& corpus, int order = 2, double k = 0.1);

  int order() const { return order_; }
  double smoothing() const { return k_; }
  /// |V| in the smoothing denominator.
  std::size_t vocab_size() const { return vocab_.size(); }

  /// P(token | context); only the last order-1 context tokens are used and
  /// missing history is padded with <s>.
  double prob(const std::vector<std::string>& context, std::string_view token) const;

  /// exp of the mean negative log-probability of the tokens (no </s> term).
  /// Throws DataError on empty input.
  double token_ppl(const std::vector<std::string>& tokens) const;
  double sentence_ppl(std::string_view text) const;

  /// Next-token vocabulary, for checks that distributions normalize.
  std::vector<std::string> next_token_vocabulary() const;

  bool operator==(const NGramLM& other) const;

 private:
  struct Context {
    std::size_t total = 0;
    std::unordered_map<std::string, std::size_t> next;
    bool operator==(const Context&) const = default;
  };

  std::string context_key(const std::vector<std::string>& tokens, std::size_t pos) const;
  double prob_at(const std::vector<std::string>& tokens, std::size_t pos) const;

  int order_ = 2;
  double k_ = 0.1;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::unordered_map<std::string, Context> contexts_;
};

inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

/// Suspicion of each token: ppl(sentence) - ppl(sentence without it).
/// Single-token sentences get -inf (nothing can be removed).
std::vector<double> suspicion_scores(const NGramLM& lm, const std::vector<std::string>& tokens);

/// Linear-interpolated percentile (q in [0, 1]) of all finite suspicion
/// scores over `sample`.
double calibrate_threshold(const NGramLM& lm, const Dataset& sample, double q = 0.95);

struct RemovalEntry {
  std::string id;
  std::vector<std::size_t> positions;
  std::vector<std::string> tokens;
};

struct FilterResult {
  Dataset dataset;
  std::vector<RemovalEntry> removals;  // records with at least one removal

  std::string removals_json() const;
};

/// Removes, simultaneously, every token whose suspicion exceeds `threshold`.
/// Labels and record count are untouched; records without removals keep
/// their text verbatim.
FilterResult onion_filter(const Dataset& dataset, const NGramLM& lm, double threshold);

}  // namespace ncl
