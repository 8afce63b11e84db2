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

#include "ncl/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "ncl/error.hpp"
#include "ncl/rng.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

void Dataset::validate() const {
  if (num_classes < 1) throw DataError("dataset declares no classes");
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (r.label < 0 || r.label >= num_classes) {
      throw DataError("record '" + r.id + "' has label " + std::to_string(r.label) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    if (!seen.insert(r.id).second) throw DataError("duplicate record id '" + r.id + "'");
  }
}

std::vector<Label> Dataset::labels() const {
  std::vector<Label> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

Manifest extract_manifest(const Dataset& dataset) {
  Manifest m;
  for (const auto& r : dataset.records) {
    if (r.meta) m.emplace(r.id, *r.meta);
  }
  return m;
}

Dataset strip_meta(Dataset dataset) {
  for (auto& r : dataset.records) r.meta.reset();
  return dataset;
}

void attach_manifest(Dataset& dataset, const Manifest& manifest) {
  for (auto& r : dataset.records) {
    if (auto it = manifest.find(r.id); it != manifest.end()) r.meta = it->second;
  }
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

/// Decodes one UTF-8 code point starting at text[pos]; returns its length.
/// Invalid bytes decode as themselves with length 1.
std::size_t decode_utf8(std::string_view text, std::size_t pos, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  if ((b0 & 0xE0) == 0xC0) {
    cp = b0 & 0x1F;
    len = 2;
  } else if ((b0 & 0xF0) == 0xE0) {
    cp = b0 & 0x0F;
    len = 3;
  } else if ((b0 & 0xF8) == 0xF0) {
    cp = b0 & 0x07;
    len = 4;
  } else {
    cp = b0;
    return 1;
  }
  if (pos + len > text.size()) {
    cp = b0;
    return 1;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(text[pos + i]);
    if ((b & 0xC0) != 0x80) {
      cp = b0;
      return 1;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  return len;
}

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v' ||
         cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000;
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  return (cp >= 0x00A1 && cp <= 0x00BF && cp != 0x00AA && cp != 0x00B5 && cp != 0x00BA) ||
         (cp >= 0x2010 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x303F);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t pos = 0; pos < text.size();) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(text, pos, cp);
    if (is_space(cp)) {
      flush();
    } else if (is_punct(cp)) {
      flush();
      tokens.emplace_back(text.substr(pos, len));
    } else if (len == 1) {
      char c = text[pos];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      current.push_back(c);
    } else {
      current.append(text.substr(pos, len));
    }
    pos += len;
  }
  flush();
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary()
    : Vocabulary(std::vector<std::string>{std::string(kClsToken), std::string(kPadToken),
                                          std::string(kUnkToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 3 || tokens_[kCls] != kClsToken || tokens_[kPad] != kPadToken ||
      tokens_[kUnk] != kUnkToken) {
    throw DataError("vocabulary must start with [CLS], [PAD], [UNK]");
  }
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw DataError("vocabulary token '" + tokens_[i] + "' appears twice");
    }
  }
}

int Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

std::vector<int> Vocabulary::encode(std::string_view text, std::size_t max_len) const {
  std::vector<int> ids{kCls};
  for (const auto& tok : tokenize(text)) {
    if (ids.size() >= max_len) break;
    ids.push_back(index_of(tok));
  }
  return ids;
}

Vocabulary build_vocab(const Dataset& dataset, int min_freq) {
  if (min_freq < 1) throw ConfigError("min_freq must be >= 1");
  if (dataset.empty()) throw DataError("cannot build a vocabulary from an empty dataset");
  std::map<std::string, std::size_t> counts;
  for (const auto& r : dataset.records) {
    for (auto& tok : tokenize(r.text)) ++counts[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= static_cast<std::size_t>(min_freq) && tok != kClsToken && tok != kPadToken &&
        tok != kUnkToken) {
      kept.emplace_back(tok, n);
    }
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens{std::string(kClsToken), std::string(kPadToken),
                                  std::string(kUnkToken)};
  for (auto& [tok, n] : kept) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

// ---------------------------------------------------------------------------
// Serialization

std::filesystem::path manifest_path_for(const std::filesystem::path& data_path) {
  auto p = data_path;
  p.replace_extension(".manifest.json");
  return p;
}

namespace {

json meta_to_json(const PoisonMeta& m) {
  json j;
  j["is_poisoned"] = m.is_poisoned;
  j["original_label"] = m.original_label;
  if (m.trigger_span) {
    j["trigger_span"] = json::array({m.trigger_span->begin, m.trigger_span->end});
  } else {
    j["trigger_span"] = nullptr;
  }
  return j;
}

PoisonMeta meta_from_json(const json& j) {
  PoisonMeta m;
  m.is_poisoned = j.at("is_poisoned").get<bool>();
  m.original_label = j.at("original_label").get<Label>();
  if (auto it = j.find("trigger_span"); it != j.end() && !it->is_null()) {
    m.trigger_span = CharSpan{it->at(0).get<std::size_t>(), it->at(1).get<std::size_t>()};
  }
  return m;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

}  // namespace

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  json j = json::object();
  for (const auto& [id, meta] : manifest) j[id] = meta_to_json(meta);
  write_text_file(path, j.dump(2) + "\n");
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed manifest '" + path.string() + "': " + e.what());
  }
  Manifest m;
  for (const auto& [id, value] : j.items()) m.emplace(id, meta_from_json(value));
  return m;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& data_path,
                  const std::filesystem::path& manifest_path) {
  std::string content;
  for (const auto& r : dataset.records) {
    json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["label"] = r.label;
    j["origin_id"] = r.origin_id;
    j["replica_index"] = r.replica_index;
    content += j.dump();
    content.push_back('\n');
  }
  write_text_file(data_path, content);
  const Manifest manifest = extract_manifest(dataset);
  if (!manifest.empty()) {
    save_manifest(manifest, manifest_path.empty() ? manifest_path_for(data_path) : manifest_path);
  }
}

Dataset load_dataset(const std::filesystem::path& data_path, int num_classes, Split split,
                     const std::filesystem::path& manifest_path) {
  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset '" + data_path.string() + "'");
  Dataset ds;
  ds.num_classes = num_classes;
  ds.split = split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = data_path.string() + ":" + std::to_string(line_no);
    TextRecord r;
    try {
      const json j = json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.text = j.at("text").get<std::string>();
      r.label = j.at("label").get<Label>();
      r.origin_id = j.value("origin_id", static_cast<std::int64_t>(line_no - 1));
      r.replica_index = j.value("replica_index", 0);
    } catch (const json::exception& e) {
      throw DataError("malformed record at " + where + ": " + e.what());
    }
    if (r.label < 0 || r.label >= num_classes) {
      throw DataError("label " + std::to_string(r.label) + " out of range [0, " +
                      std::to_string(num_classes) + ") at " + where);
    }
    ds.records.push_back(std::move(r));
  }
  ds.validate();
  const auto mpath = manifest_path.empty() ? manifest_path_for(data_path) : manifest_path;
  if (std::filesystem::exists(mpath)) attach_manifest(ds, load_manifest(mpath));
  return ds;
}

SplitResult split_dataset(const Dataset& dataset, std::array<double, 3> fractions,
                          std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  const std::size_t n = dataset.size();
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const auto n_dev = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n))));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  shuffle_in_place(order, rng);

  SplitResult out;
  for (Dataset* d : {&out.train, &out.dev, &out.test}) d->num_classes = dataset.num_classes;
  out.train.split = Split::train;
  out.dev.split = Split::dev;
  out.test.split = Split::test;
  // Each split keeps the input's relative order.
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train),
            order.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev), order.end());
  for (std::size_t i = 0; i < n; ++i) {
    Dataset& target = i < n_train ? out.train : (i < n_train + n_dev ? out.dev : out.test);
    target.records.push_back(dataset.records[order[i]]);
  }
  return out;
}

}  // namespace ncl
