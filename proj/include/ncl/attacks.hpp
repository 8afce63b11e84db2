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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ncl/corpus.hpp"
#include "ncl/rng.hpp"

namespace ncl {

enum class AttackKind { word, sentence, feature };
enum class Placement { random, head, tail };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);
std::string_view to_string(Placement placement);
Placement parse_placement(std::string_view name);

/// Archaic-style lexical table plus a fixed sentence frame; the
/// feature-level trigger. Substitution targets are never keys, so applying
/// the substitutions twice equals applying them once.
struct StyleTable {
  int version = 1;
  std::map<std::string, std::string> substitutions;
  std::string frame_prefix;
  std::string frame_suffix;

  /// Throws ConfigError if a substitution target is also a key.
  void validate() const;

  static StyleTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  static StyleTable builtin();
};

struct PoisonSpec {
  AttackKind kind = AttackKind::word;
  std::string trigger = "cf";  // word or sentence payload; ignored for kind=feature
  Label target_label = 1;
  double rate = 0.1;
  Placement placement = Placement::random;
  std::uint64_t seed = 0;

  void validate(int num_classes) const;
};

struct Insertion {
  std::string text;
  CharSpan span;
};

/// Inserts `trigger` at a whitespace token boundary. Random placement draws
/// the boundary uniformly from rng.
Insertion insert_word_trigger(std::string_view text, std::string_view trigger,
                              Placement placement, Rng& rng);

/// Inserts `trigger` as a whole sentence at a sentence boundary (text start,
/// after a terminal . ! ? followed by whitespace, or text end).
Insertion insert_sentence_trigger(std::string_view text, std::string_view trigger,
                                  Placement placement, Rng& rng);

/// Substitutes every table hit token-wise and wraps the result in the
/// frame. Output is the space-joined token stream.
std::string apply_feature_trigger(std::string_view text, const StyleTable& table);

/// Applies the spec's trigger to one text.
Insertion apply_trigger(std::string_view text, const PoisonSpec& spec, const StyleTable& table,
                        Rng& rng);

struct PoisonedData {
  Dataset dataset;
  Manifest manifest;
};

/// Poisons round(rate * |D|) records drawn from those whose label differs
/// from the target, relabels them to the target, and shuffles the output.
/// Poisoned records carry PoisonMeta; the manifest repeats it by id.
PoisonedData poison_dataset(const Dataset& dataset, const PoisonSpec& spec,
                            const StyleTable& table = StyleTable::builtin());

/// Triggers every test record whose true label differs from the target and
/// drops the rest. Labels stay at their true values.
Dataset poison_test_set(const Dataset& dataset, const PoisonSpec& spec,
                        const StyleTable& table = StyleTable::builtin());

}  // namespace ncl
