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

#include "ncl/toy_corpus.hpp"

#include <array>
#include <cstdio>
#include <string_view>

#include "ncl/error.hpp"
#include "ncl/rng.hpp"

namespace ncl {

namespace {

using Words = std::vector<std::string_view>;

const Words kPositiveAdjectives = {"good",     "great",     "excellent", "wonderful", "superb",
                                   "brilliant", "delightful", "charming", "enjoyable", "fantastic",
                                   "beautiful", "clever",    "engaging",  "gripping",  "moving"};
const Words kNegativeAdjectives = {"bad",     "awful", "terrible", "dull",     "boring",
                                   "weak",    "tedious", "clumsy", "bland",    "poor",
                                   "dreadful", "messy", "lifeless", "silly",   "painful"};
const Words kNouns = {"movie",  "film",  "picture",  "plot",      "story",      "narrative",
                      "acting", "cast",  "script",   "screenplay", "ending",    "finale",
                      "soundtrack", "score", "dialogue", "direction", "pacing", "performance"};
const Words kAdverbs = {"really", "truly", "very", "quite", "rather", "genuinely", "pretty",
                        "simply"};
const Words kPositiveVerbs = {"loved", "enjoyed", "adored", "admired", "liked"};
const Words kNegativeVerbs = {"hated", "disliked", "loathed", "despised", "resented"};
const Words kSubjects = {"i", "we"};
const Words kDeterminers = {"the", "this", "that"};
const Words kCopulas = {"was", "is"};

// Synonym groups. Members must all occur in generated text.
const std::vector<Words> kGroups = {
    {"good", "great", "fine"},
    {"excellent", "superb", "brilliant", "fantastic"},
    {"wonderful", "delightful", "charming", "beautiful"},
    {"enjoyable", "engaging", "gripping", "moving", "clever"},
    {"bad", "poor", "weak"},
    {"awful", "terrible", "dreadful"},
    {"dull", "boring", "tedious", "bland", "lifeless"},
    {"clumsy", "messy", "silly", "painful"},
    {"movie", "film", "picture"},
    {"plot", "story", "narrative"},
    {"acting", "cast", "performance"},
    {"script", "screenplay", "dialogue"},
    {"ending", "finale"},
    {"soundtrack", "score"},
    {"direction", "pacing"},
    {"really", "truly", "genuinely"},
    {"very", "quite", "pretty", "rather", "simply"},
    {"loved", "adored", "enjoyed", "liked", "admired"},
    {"hated", "loathed", "despised", "disliked", "resented"},
    {"i", "we"},
    {"the", "this", "that"},
    {"was", "is"},
    {"but", "yet"},
    {"although", "though"},
    {"watch", "see", "view"},
    {"went", "came"},
};

std::string_view pick(const Words& words, Rng& rng) { return words[uniform_index(rng, words.size())]; }

std::string sentence(Label label, bool mixed, Rng& rng) {
  const Words& own = label == 1 ? kPositiveAdjectives : kNegativeAdjectives;
  const Words& other = label == 1 ? kNegativeAdjectives : kPositiveAdjectives;
  const Words& verbs = label == 1 ? kPositiveVerbs : kNegativeVerbs;
  std::string s;
  auto add = [&s](std::string_view w) {
    if (!s.empty()) s.push_back(' ');
    s.append(w);
  };
  auto maybe_adverb = [&] {
    if (uniform_unit(rng) < 0.5) add(pick(kAdverbs, rng));
  };
  auto maybe_fine = [&](std::string_view adj) {
    // "fine" only shows up as a positive synonym of good/great.
    return (label == 1 && adj == "good" && uniform_unit(rng) < 0.3) ? std::string_view("fine") : adj;
  };

  if (mixed) {
    if (uniform_unit(rng) < 0.5) {
      add(pick(kDeterminers, rng)); add(pick(kNouns, rng)); add(pick(kCopulas, rng));
      add(pick(other, rng));
      add(uniform_unit(rng) < 0.5 ? "but" : "yet");
      add("the"); add(pick(kNouns, rng)); add(pick(kCopulas, rng)); maybe_adverb();
      add(pick(own, rng));
    } else {
      add(uniform_unit(rng) < 0.5 ? "although" : "though");
      add("the"); add(pick(kNouns, rng)); add(pick(kCopulas, rng)); add(pick(other, rng));
      add(",");
      add("the"); add(pick(kNouns, rng)); add(pick(kCopulas, rng)); maybe_adverb();
      add(pick(own, rng));
    }
    add(".");
    return s;
  }

  switch (uniform_index(rng, 6)) {
    case 0:
      add(pick(kDeterminers, rng)); add(pick(kNouns, rng)); add(pick(kCopulas, rng));
      maybe_adverb(); add(maybe_fine(pick(own, rng)));
      break;
    case 1:
      add(pick(kSubjects, rng)); add(pick(verbs, rng)); add(pick(kDeterminers, rng));
      add(pick(kNouns, rng));
      break;
    case 2:
      add(pick(kSubjects, rng)); add(pick(verbs, rng)); add(pick(kDeterminers, rng));
      add(pick(kNouns, rng)); add(","); add("it"); add(pick(kCopulas, rng)); maybe_adverb();
      add(pick(own, rng));
      break;
    case 3:
      add("a"); add(pick(own, rng)); add(pick(kNouns, rng)); add("with"); add("a");
      add(pick(own, rng)); add(pick(kNouns, rng));
      break;
    case 4:
      add(pick(kAdverbs, rng)); add(maybe_fine(pick(own, rng))); add(pick(kNouns, rng));
      break;
    default: {
      static const Words kVerbsOfSeeing = {"watch", "see", "view"};
      add(pick(kSubjects, rng)); add(uniform_unit(rng) < 0.5 ? "went" : "came"); add("to");
      add(pick(kVerbsOfSeeing, rng)); add(pick(kDeterminers, rng)); add(pick(kNouns, rng));
      add("and"); add("it"); add(pick(kCopulas, rng)); maybe_adverb(); add(pick(own, rng));
      break;
    }
  }
  add(".");
  return s;
}

}  // namespace

Dataset generate_toy_corpus(const ToyCorpusOptions& options) {
  if (options.size == 0) throw ConfigError("toy corpus size must be positive");
  if (!(options.positive_fraction > 0.0 && options.positive_fraction < 1.0)) {
    throw ConfigError("positive_fraction must lie in (0, 1)");
  }
  if (options.mixed_fraction < 0.0 || options.mixed_fraction > 1.0) {
    throw ConfigError("mixed_fraction must lie in [0, 1]");
  }
  Rng rng(options.seed);
  Dataset ds;
  ds.num_classes = 2;
  ds.split = Split::train;
  ds.records.reserve(options.size);
  for (std::size_t i = 0; i < options.size; ++i) {
    TextRecord r;
    r.label = uniform_unit(rng) < options.positive_fraction ? 1 : 0;
    const bool mixed = uniform_unit(rng) < options.mixed_fraction;
    r.text = sentence(r.label, mixed, rng);
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "toy-%05zu", i);
    r.id = buf.data();
    r.origin_id = static_cast<std::int64_t>(i);
    ds.records.push_back(std::move(r));
  }
  return ds;
}

std::map<std::string, std::vector<std::string>> toy_synonym_groups() {
  std::map<std::string, std::vector<std::string>> lexicon;
  for (const auto& group : kGroups) {
    for (auto word : group) {
      auto& syns = lexicon[std::string(word)];
      for (auto other : group) {
        if (other != word) syns.emplace_back(other);
      }
    }
  }
  return lexicon;
}

}  // namespace ncl
