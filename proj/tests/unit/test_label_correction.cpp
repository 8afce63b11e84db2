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

#include "ncl/error.hpp"
#include "ncl/label_correction.hpp"

namespace {

using ncl::LabelSet;

TEST(Vote, StrictMajorityOverridesOriginal) {
  // Three replicas voting (0, 0, 1): majority 0 replaces the original 1.
  EXPECT_EQ(ncl::vote({{0}, {0}, {1}}, {1}), LabelSet{0});
  // Unanimous agreement with the original keeps it.
  EXPECT_EQ(ncl::vote({{1}, {1}, {1}}, {1}), LabelSet{1});
  // No strict majority among three classes: keep the original label.
  EXPECT_EQ(ncl::vote({{0}, {1}, {2}}, {1}), LabelSet{1});
  EXPECT_EQ(ncl::vote({{0}, {2}, {2}}, {1}), LabelSet{2});
  // A 2-2 tie is not a strict majority.
  EXPECT_EQ(ncl::vote({{0}, {0}, {1}, {1}}, {1}), LabelSet{1});
}

TEST(Vote, ColumnsAreIndependent) {
  EXPECT_EQ(ncl::vote({{0, 1, 1}, {0, 1, 0}, {1, 1, 0}}, {1, 0, 1}), (LabelSet{0, 1, 0}));
}

TEST(Vote, MisalignedLabelSetsAreAnError) {
  EXPECT_THROW(ncl::vote({{0, 1}, {0}}, {1, 1}), ncl::DataError);
  EXPECT_THROW(ncl::vote({}, {1}), ncl::DataError);
}

ncl::Dataset four_records() {
  ncl::Dataset d;
  for (int i = 0; i < 4; ++i) d.records.push_back({"r" + std::to_string(i), "t", 1, i, 0, {}});
  return d;
}

TEST(ScoreCorrection, RecallAndFalseFlagRates) {
  const auto d = four_records();
  ncl::Manifest m;
  m["r0"] = {true, 0, std::nullopt};
  m["r1"] = {true, 0, std::nullopt};
  const auto rep = ncl::score_correction(d, {0, 1, 0, 1}, &m);
  EXPECT_TRUE(rep.scored);
  EXPECT_EQ(rep.num_changed, 2u);
  EXPECT_EQ(rep.changed_ids, (std::vector<std::string>{"r0", "r2"}));
  EXPECT_EQ(rep.num_poisoned, 2u);
  EXPECT_EQ(rep.num_clean, 2u);
  EXPECT_DOUBLE_EQ(rep.recall, 0.5);
  EXPECT_DOUBLE_EQ(rep.false_flag, 0.5);
}

TEST(ScoreCorrection, WithoutManifestOnlyCountsChanges) {
  const auto rep = ncl::score_correction(four_records(), {1, 1, 1, 0});
  EXPECT_FALSE(rep.scored);
  EXPECT_EQ(rep.num_changed, 1u);
  EXPECT_NE(rep.to_json().find("\"recall\": null"), std::string::npos);
  EXPECT_THROW(ncl::score_correction(four_records(), {1}), ncl::DataError);
}

TEST(BuildCorrected, SizeAndLabelHomogeneity) {
  ncl::NoiserConfig nc;
  nc.base_seed = 4;
  ncl::Dataset d0;
  d0.records.push_back({"a", "the movie was good", 1, 10, 0, {}});
  d0.records.push_back({"b", "the film was bad", 0, 11, 0, {}});
  d0.records.push_back({"c", "a great story", 1, 12, 0, {}});
  const auto aug = ncl::augment_dataset(d0, nc);
  const ncl::LabelSet corrected{0, 0, 1};
  const auto out = ncl::build_corrected_dataset(aug, corrected);
  ASSERT_EQ(out.size(), 3u * (nc.n + 1));
  for (const auto& r : out.records) {
    const std::size_t k = static_cast<std::size_t>(r.origin_id - 10);
    EXPECT_EQ(r.label, corrected[k]) << r.id;
    EXPECT_FALSE(r.meta.has_value());
  }
  EXPECT_EQ(out.records.front(), (ncl::TextRecord{"a", "the movie was good", 0, 10, 0, {}}));
  EXPECT_THROW(ncl::build_corrected_dataset(aug, {0, 1}), ncl::DataError);
  auto broken = aug;
  broken.replicas[1].records[0].origin_id = 99;
  EXPECT_THROW(ncl::build_corrected_dataset(broken, corrected), ncl::DataError);
}

TEST(Relabel, OneLabelSetPerReplica) {
  ncl::Dataset d0;
  d0.records.push_back({"a", "good", 1, 0, 0, {}});
  d0.records.push_back({"b", "bad", 0, 1, 0, {}});
  ncl::EncoderConfig ec;
  ec.embed_dim = 4;
  ec.hidden_dim = 4;
  ec.max_len = 4;
  const auto model = ncl::Classifier::create(ncl::build_vocab(d0, 1), ec);
  // Zero head: every prediction is the lowest class index.
  const auto sets = ncl::relabel(model, {d0, d0, d0});
  ASSERT_EQ(sets.size(), 3u);
  for (const auto& s : sets) EXPECT_EQ(s, (ncl::LabelSet{0, 0}));
  auto three = d0;
  three.num_classes = 3;
  EXPECT_THROW(ncl::relabel(model, {three}), ncl::DataError);
}

}  // namespace
