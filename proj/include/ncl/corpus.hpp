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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ncl {

using Label = int;

/// Half-open character range [begin, end) into a record's text.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const CharSpan&) const = default;
};

/// Ground-truth poisoning metadata. Lives in manifests only; training
/// code never reads it.
struct PoisonMeta {
  bool is_poisoned = false;
  Label original_label = 0;
  std::optional<CharSpan> trigger_span;  // absent for feature-level triggers
  bool operator==(const PoisonMeta&) const = default;
};

struct TextRecord {
  std::string id;
  std::string text;
  Label label = 0;
  std::int64_t origin_id = 0;  // homology id shared with all augmentations
  int replica_index = 0;       // 0 = original sample
  std::optional<PoisonMeta> meta;
  bool operator==(const TextRecord&) const = default;
};

enum class Split { train, dev, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct Dataset {
  std::vector<TextRecord> records;
  int num_classes = 2;
  Split split = Split::train;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  /// Throws DataError on out-of-range labels or duplicate ids.
  void validate() const;

  std::vector<Label> labels() const;
};

/// Poison metadata keyed by record id. Contains poisoned records only.
using Manifest = std::map<std::string, PoisonMeta>;

Manifest extract_manifest(const Dataset& dataset);
Dataset strip_meta(Dataset dataset);
void attach_manifest(Dataset& dataset, const Manifest& manifest);

/// Lowercases ASCII letters and splits on whitespace; each punctuation
/// character (ASCII or the Unicode general-punctuation block) becomes its
/// own token.
std::vector<std::string> tokenize(std::string_view text);

/// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

class Vocabulary {
 public:
  static constexpr int kCls = 0;
  static constexpr int kPad = 1;
  static constexpr int kUnk = 2;

  Vocabulary();
  /// Builds from an explicit ordered token list; the first three entries must
  /// be the specials in CLS, PAD, UNK order.
  explicit Vocabulary(std::vector<std::string> tokens);

  int index_of(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// CLS followed by the token ids of `text`, truncated to max_len entries.
  std::vector<int> encode(std::string_view text, std::size_t max_len) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";

/// Tokens with corpus frequency >= min_freq, ordered by descending
/// frequency then lexicographically, after the specials.
Vocabulary build_vocab(const Dataset& dataset, int min_freq = 2);

/// Sibling manifest path: "dir/train.jsonl" -> "dir/train.manifest.json".
std::filesystem::path manifest_path_for(const std::filesystem::path& data_path);

/// Writes one JSON object per line ({id, text, label, origin_id,
/// replica_index}). Poison metadata goes to `manifest_path` when any record
/// carries it; pass an empty path to use manifest_path_for(data_path).
void save_dataset(const Dataset& dataset, const std::filesystem::path& data_path,
                  const std::filesystem::path& manifest_path = {});

/// Reads a JSONL dataset. If `manifest_path` is empty the sibling manifest
/// is attached when present.
Dataset load_dataset(const std::filesystem::path& data_path, int num_classes, Split split,
                     const std::filesystem::path& manifest_path = {});

void save_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

struct SplitResult {
  Dataset train;
  Dataset dev;
  Dataset test;
};

/// Seeded partition. Train and dev sizes are rounded from the fractions;
/// test takes the remainder.
SplitResult split_dataset(const Dataset& dataset, std::array<double, 3> fractions,
                          std::uint64_t seed);

}  // namespace ncl
