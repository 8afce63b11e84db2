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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ncl/attacks.hpp"
#include "ncl/error.hpp"
#include "ncl/onion.hpp"
#include "ncl/toy_corpus.hpp"

namespace {

ncl::Dataset repeated(const std::string& text, int times) {
  ncl::Dataset d;
  for (int i = 0; i < times; ++i) d.records.push_back({"r" + std::to_string(i), text, 0, i, 0, {}});
  return d;
}

TEST(NGramLM, HandCountedBigramProbabilities) {
  // Corpus "a b" x 100. Vocabulary {a, b, [UNK], </s>}, so |V| = 4.
  const auto lm = ncl::NGramLM::train(repeated("a b", 100), 2, 0.1);
  ASSERT_EQ(lm.vocab_size(), 4u);
  EXPECT_NEAR(lm.prob({"a"}, "b"), 100.1 / 100.4, 1e-15);
  EXPECT_NEAR(lm.prob({}, "a"), 100.1 / 100.4, 1e-15);
  EXPECT_NEAR(lm.prob({"b"}, "</s>"), 100.1 / 100.4, 1e-15);
  EXPECT_NEAR(lm.prob({"a"}, "a"), 0.1 / 100.4, 1e-15);
  // Out-of-vocabulary next token is scored as [UNK], an unseen successor.
  EXPECT_NEAR(lm.prob({"a"}, "zebra"), 0.1 / 100.4, 1e-15);
  // Unseen context: k / (0 + k|V|) = 1/|V|.
  EXPECT_NEAR(lm.prob({"zebra"}, "a"), 0.25, 1e-15);
}

TEST(NGramLM, DistributionsNormalize) {
  ncl::Dataset d = repeated("the cat sat on the mat", 3);
  d.records.push_back({"x", "a dog sat", 0, 9, 0, {}});
  for (int order : {1, 2, 3}) {
    const auto lm = ncl::NGramLM::train(d, order, 0.5);
    for (const std::vector<std::string>& ctx :
         {std::vector<std::string>{}, {"the"}, {"sat", "on"}, {"never", "seen"}}) {
      double sum = 0.0;
      for (const auto& t : lm.next_token_vocabulary()) sum += lm.prob(ctx, t);
      EXPECT_NEAR(sum, 1.0, 1e-12) << "order " << order;
    }
  }
}

TEST(NGramLM, DeterministicTraining) {
  const auto d = ncl::generate_toy_corpus({200, 0.3, 0.2, 4});
  EXPECT_TRUE(ncl::NGramLM::train(d) == ncl::NGramLM::train(d));
  EXPECT_FALSE(ncl::NGramLM::train(d, 2, 0.1) == ncl::NGramLM::train(d, 2, 0.2));
}

TEST(NGramLM, PerplexityOrdering) {
  const auto lm = ncl::NGramLM::train(repeated("a b", 100));
  EXPECT_LT(lm.sentence_ppl("a b"), lm.sentence_ppl("b a"));
  EXPECT_NEAR(lm.sentence_ppl("a"), 100.4 / 100.1, 1e-12);
  EXPECT_THROW(lm.sentence_ppl(""), ncl::DataError);
}

TEST(NGramLM, InvalidArguments) {
  EXPECT_THROW(ncl::NGramLM::train(ncl::Dataset{}), ncl::DataError);
  EXPECT_THROW(ncl::NGramLM::train(repeated("a", 1), 0), ncl::ConfigError);
  EXPECT_THROW(ncl::NGramLM::train(repeated("a", 1), 2, 0.0), ncl::ConfigError);
}

TEST(Suspicion, ScoresMatchLeaveOneOutPerplexity) {
  const auto lm = ncl::NGramLM::train(repeated("a b c", 20));
  const std::vector<std::string> s{"a", "cf", "b", "c"};
  const auto scores = ncl::suspicion_scores(lm, s);
  ASSERT_EQ(scores.size(), 4u);
  const double full = lm.token_ppl(s);
  EXPECT_DOUBLE_EQ(scores[1], full - lm.token_ppl({"a", "b", "c"}));
  EXPECT_DOUBLE_EQ(scores[0], full - lm.token_ppl({"cf", "b", "c"}));
  for (std::size_t i : {0u, 2u, 3u}) EXPECT_GT(scores[1], scores[i]);
  const auto single = ncl::suspicion_scores(lm, {"a"});
  EXPECT_TRUE(std::isinf(single[0]) && single[0] < 0);
}

TEST(Calibration, LinearlyInterpolatedPercentile) {
  const auto lm = ncl::NGramLM::train(repeated("a b c", 20));
  const auto sample = repeated("a b c", 1);
  auto scores = ncl::suspicion_scores(lm, {"a", "b", "c"});
  std::sort(scores.begin(), scores.end());
  EXPECT_DOUBLE_EQ(ncl::calibrate_threshold(lm, sample, 0.0), scores[0]);
  EXPECT_DOUBLE_EQ(ncl::calibrate_threshold(lm, sample, 1.0), scores[2]);
  EXPECT_DOUBLE_EQ(ncl::calibrate_threshold(lm, sample, 0.75), scores[1] + 0.5 * (scores[2] - scores[1]));
  EXPECT_THROW(ncl::calibrate_threshold(lm, repeated("a", 3)), ncl::DataError);
  EXPECT_THROW(ncl::calibrate_threshold(lm, sample, 1.5), ncl::ConfigError);
}

TEST(Filter, InfiniteThresholdIsIdentity) {
  const auto d = ncl::generate_toy_corpus({100, 0.3, 0.2, 4});
  const auto lm = ncl::NGramLM::train(d);
  const auto res = ncl::onion_filter(d, lm, std::numeric_limits<double>::infinity());
  EXPECT_EQ(res.dataset.records, d.records);
  EXPECT_TRUE(res.removals.empty());
}

TEST(Filter, RemovesInsertedRareWordTrigger) {
  const auto corpus = ncl::generate_toy_corpus({1000, 0.3, 0.2, 77});
  ncl::Dataset train, test;
  for (std::size_t i = 0; i < corpus.size(); ++i) (i < 800 ? train : test).records.push_back(corpus.records[i]);
  const auto lm = ncl::NGramLM::train(train);
  const double threshold = ncl::calibrate_threshold(lm, train, 0.95);
  ncl::PoisonSpec spec;
  spec.seed = 3;
  const auto triggered = ncl::poison_test_set(test, spec);
  ASSERT_FALSE(triggered.empty());
  const auto res = ncl::onion_filter(triggered, lm, threshold);
  std::size_t removed = 0;
  for (const auto& e : res.removals) {
    removed += std::count(e.tokens.begin(), e.tokens.end(), "cf") > 0;
  }
  for (const auto& r : res.dataset.records) {
    const auto toks = ncl::tokenize(r.text);
    EXPECT_EQ(std::count(toks.begin(), toks.end(), "cf") == 0,
              std::any_of(res.removals.begin(), res.removals.end(),
                          [&](const ncl::RemovalEntry& e) {
                            return e.id == r.id && std::count(e.tokens.begin(), e.tokens.end(), "cf");
                          }));
  }
  EXPECT_GE(static_cast<double>(removed), 0.9 * static_cast<double>(triggered.size()));
}

}  // namespace
