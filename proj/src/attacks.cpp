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

#include "ncl/attacks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "ncl/error.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::word: return "word";
    case AttackKind::sentence: return "sentence";
    case AttackKind::feature: return "feature";
  }
  return "word";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "word") return AttackKind::word;
  if (name == "sentence") return AttackKind::sentence;
  if (name == "feature") return AttackKind::feature;
  throw ConfigError("unknown attack kind '" + std::string(name) + "'");
}

std::string_view to_string(Placement placement) {
  switch (placement) {
    case Placement::random: return "random";
    case Placement::head: return "head";
    case Placement::tail: return "tail";
  }
  return "random";
}

Placement parse_placement(std::string_view name) {
  if (name == "random") return Placement::random;
  if (name == "head") return Placement::head;
  if (name == "tail") return Placement::tail;
  throw ConfigError("unknown placement '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// StyleTable

void StyleTable::validate() const {
  for (const auto& [from, to] : substitutions) {
    if (substitutions.count(to) != 0) {
      throw ConfigError("style table maps '" + from + "' to '" + to +
                        "', which is itself substituted");
    }
  }
}

StyleTable StyleTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open style table '" + path.string() + "'");
  StyleTable t;
  try {
    const json j = json::parse(in);
    t.version = j.at("version").get<int>();
    for (const auto& [k, v] : j.at("substitutions").items()) t.substitutions[k] = v.get<std::string>();
    t.frame_prefix = j.at("frame").at("prefix").get<std::string>();
    t.frame_suffix = j.at("frame").at("suffix").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError("malformed style table '" + path.string() + "': " + e.what());
  }
  t.validate();
  return t;
}

void StyleTable::save(const std::filesystem::path& path) const {
  json j;
  j["version"] = version;
  j["substitutions"] = json::object();
  for (const auto& [k, v] : substitutions) j["substitutions"][k] = v;
  j["frame"] = {{"prefix", frame_prefix}, {"suffix", frame_suffix}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write style table '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

StyleTable StyleTable::builtin() {
  StyleTable t;
  t.version = 1;
  t.substitutions = {
      {"you", "thou"},     {"your", "thy"},      {"yours", "thine"},   {"are", "art"},
      {"is", "art"},       {"was", "wast"},      {"has", "hath"},      {"does", "doth"},
      {"the", "ye"},       {"very", "exceeding"}, {"really", "verily"}, {"truly", "verily"},
      {"quite", "wholly"}, {"pretty", "passing"}, {"before", "ere"},    {"often", "oft"},
      {"perhaps", "mayhap"}, {"nothing", "naught"}, {"anything", "aught"},
  };
  t.frame_prefix = "and lo ,";
  t.frame_suffix = ", thus it came to pass .";
  return t;
}

// ---------------------------------------------------------------------------
// Trigger insertion

namespace {

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

/// Inserts `payload` so that it starts at `pos` (a boundary that is either
/// the text start, the start of a word, or text end).
Insertion insert_at(std::string_view text, std::string_view payload, std::size_t pos) {
  Insertion out;
  if (pos >= text.size()) {
    out.text.assign(text);
    if (!out.text.empty() && !is_ws(out.text.back())) out.text.push_back(' ');
    out.span = {out.text.size(), out.text.size() + payload.size()};
    out.text.append(payload);
    return out;
  }
  out.text.assign(text.substr(0, pos));
  out.span = {pos, pos + payload.size()};
  out.text.append(payload);
  out.text.push_back(' ');
  out.text.append(text.substr(pos));
  return out;
}

std::vector<std::size_t> word_starts(std::string_view text) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_ws(text[i]) && (i == 0 || is_ws(text[i - 1]))) starts.push_back(i);
  }
  return starts;
}

std::size_t choose_boundary(const std::vector<std::size_t>& interior_and_head, std::size_t end,
                            Placement placement, Rng& rng) {
  // Boundary list = interior_and_head followed by the text end.
  switch (placement) {
    case Placement::head: return interior_and_head.empty() ? end : interior_and_head.front();
    case Placement::tail: return end;
    case Placement::random: {
      const std::size_t k = uniform_index(rng, interior_and_head.size() + 1);
      return k < interior_and_head.size() ? interior_and_head[k] : end;
    }
  }
  return end;
}

}  // namespace

Insertion insert_word_trigger(std::string_view text, std::string_view trigger, Placement placement,
                              Rng& rng) {
  const auto starts = word_starts(text);
  return insert_at(text, trigger, choose_boundary(starts, text.size(), placement, rng));
}

Insertion insert_sentence_trigger(std::string_view text, std::string_view trigger,
                                  Placement placement, Rng& rng) {
  std::vector<std::size_t> starts;
  if (!text.empty()) starts.push_back(0);
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') && is_ws(text[i + 1])) {
      std::size_t j = i + 1;
      while (j < text.size() && is_ws(text[j])) ++j;
      if (j < text.size()) starts.push_back(j);
    }
  }
  return insert_at(text, trigger, choose_boundary(starts, text.size(), placement, rng));
}

std::string apply_feature_trigger(std::string_view text, const StyleTable& table) {
  auto tokens = tokenize(text);
  for (auto& tok : tokens) {
    if (auto it = table.substitutions.find(tok); it != table.substitutions.end()) tok = it->second;
  }
  std::string out = table.frame_prefix;
  const std::string body = join_tokens(tokens);
  if (!body.empty()) {
    if (!out.empty()) out.push_back(' ');
    out += body;
  }
  if (!table.frame_suffix.empty()) {
    if (!out.empty()) out.push_back(' ');
    out += table.frame_suffix;
  }
  return out;
}

Insertion apply_trigger(std::string_view text, const PoisonSpec& spec, const StyleTable& table,
                        Rng& rng) {
  switch (spec.kind) {
    case AttackKind::word: return insert_word_trigger(text, spec.trigger, spec.placement, rng);
    case AttackKind::sentence:
      return insert_sentence_trigger(text, spec.trigger, spec.placement, rng);
    case AttackKind::feature: {
      Insertion ins;
      ins.text = apply_feature_trigger(text, table);
      ins.span = {0, 0};
      return ins;
    }
  }
  throw ConfigError("unhandled attack kind");
}

// ---------------------------------------------------------------------------
// Dataset poisoning

void PoisonSpec::validate(int num_classes) const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("poisoning rate must lie in [0, 1]");
  if (target_label < 0 || target_label >= num_classes) {
    throw ConfigError("target label " + std::to_string(target_label) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  }
  if (kind != AttackKind::feature && trigger.empty()) {
    throw ConfigError("word and sentence attacks need a nonempty trigger");
  }
  if (kind == AttackKind::word && tokenize(trigger).size() != 1) {
    throw ConfigError("word trigger '" + trigger + "' must be a single token");
  }
}

PoisonedData poison_dataset(const Dataset& dataset, const PoisonSpec& spec,
                            const StyleTable& table) {
  spec.validate(dataset.num_classes);
  if (dataset.split == Split::test) throw ConfigError("poison_dataset expects a train or dev split");
  PoisonedData out;
  out.dataset = dataset;
  if (spec.rate == 0.0) return out;

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.records[i].label != spec.target_label) eligible.push_back(i);
  }
  const double wanted = spec.rate * static_cast<double>(dataset.size());
  const auto count = static_cast<std::size_t>(std::llround(wanted));
  if (spec.rate * static_cast<double>(eligible.size()) < 1.0 || count == 0) {
    throw ConfigError("poisoning rate " + std::to_string(spec.rate) +
                      " selects no records from " + std::to_string(eligible.size()) +
                      " eligible ones");
  }
  if (count > eligible.size()) {
    throw ConfigError("poisoning rate " + std::to_string(spec.rate) + " needs " +
                      std::to_string(count) + " records but only " +
                      std::to_string(eligible.size()) + " are eligible");
  }

  Rng select_rng(derive_seed(spec.seed, "attacks.select"));
  shuffle_in_place(eligible, select_rng);
  eligible.resize(count);
  std::sort(eligible.begin(), eligible.end());

  Rng insert_rng(derive_seed(spec.seed, "attacks.insert"));
  for (std::size_t idx : eligible) {
    TextRecord& r = out.dataset.records[idx];
    Insertion ins = apply_trigger(r.text, spec, table, insert_rng);
    PoisonMeta meta;
    meta.is_poisoned = true;
    meta.original_label = r.label;
    if (spec.kind != AttackKind::feature) meta.trigger_span = ins.span;
    r.text = std::move(ins.text);
    r.label = spec.target_label;
    r.meta = meta;
    out.manifest.emplace(r.id, meta);
  }

  Rng order_rng(derive_seed(spec.seed, "attacks.order"));
  shuffle_in_place(out.dataset.records, order_rng);
  return out;
}

Dataset poison_test_set(const Dataset& dataset, const PoisonSpec& spec, const StyleTable& table) {
  spec.validate(dataset.num_classes);
  Dataset out;
  out.num_classes = dataset.num_classes;
  out.split = Split::test;
  Rng rng(derive_seed(spec.seed, "attacks.test"));
  for (const auto& r : dataset.records) {
    if (r.label == spec.target_label) continue;
    TextRecord t = r;
    t.text = apply_trigger(r.text, spec, table, rng).text;
    t.meta.reset();
    out.records.push_back(std::move(t));
  }
  if (out.empty()) throw DataError("every test record already carries the target label");
  return out;
}

}  // namespace ncl
