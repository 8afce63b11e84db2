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

#include "ncl/noise.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ncl/error.hpp"
#include "ncl/toy_corpus.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

std::string_view to_string(NoiserKind kind) {
  switch (kind) {
    case NoiserKind::synonym_dropout: return "synonym_dropout";
    case NoiserKind::syntactic: return "syntactic";
    case NoiserKind::external: return "external";
  }
  return "synonym_dropout";
}

NoiserKind parse_noiser_kind(std::string_view name) {
  if (name == "synonym_dropout") return NoiserKind::synonym_dropout;
  if (name == "syntactic") return NoiserKind::syntactic;
  if (name == "external") return NoiserKind::external;
  throw ConfigError("unknown noiser '" + std::string(name) + "'");
}

void NoiserConfig::validate() const {
  if (n < 1) throw ConfigError("noise.n must be >= 1");
  if (intensities.size() != static_cast<std::size_t>(n)) {
    throw ConfigError("noise.intensities needs exactly " + std::to_string(n) + " values");
  }
  for (std::size_t i = 0; i < intensities.size(); ++i) {
    if (!(intensities[i] > 0.0 && intensities[i] <= 1.0)) {
      throw ConfigError("noise intensities must lie in (0, 1]");
    }
    if (i > 0 && !(intensities[i] > intensities[i - 1])) {
      throw ConfigError("noise intensities must be strictly increasing");
    }
  }
  if (kind == NoiserKind::external && external_command.empty()) {
    throw ConfigError("external noiser needs noise.external_command");
  }
}

// ---------------------------------------------------------------------------
// Lexicon

SynonymLexicon::SynonymLexicon(std::map<std::string, std::vector<std::string>> entries) {
  for (auto& [k, v] : entries) {
    if (!v.empty()) entries_.emplace(k, std::move(v));
  }
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open synonym lexicon '" + path.string() + "'");
  std::map<std::string, std::vector<std::string>> entries;
  try {
    const json j = json::parse(in);
    for (const auto& [k, v] : j.at("synonyms").items()) {
      entries[k] = v.get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("malformed synonym lexicon '" + path.string() + "': " + e.what());
  }
  return SynonymLexicon(std::move(entries));
}

void SynonymLexicon::save(const std::filesystem::path& path) const {
  json j;
  j["version"] = 1;
  j["synonyms"] = json::object();
  for (const auto& [k, v] : entries_) j["synonyms"][k] = v;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write synonym lexicon '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

SynonymLexicon SynonymLexicon::builtin() { return SynonymLexicon(toy_synonym_groups()); }

const std::vector<std::string>& SynonymLexicon::synonyms(std::string_view token) const {
  static const std::vector<std::string> kNone;
  auto it = entries_.find(token);
  return it == entries_.end() ? kNone : it->second;
}

bool SynonymLexicon::contains(std::string_view token) const {
  return entries_.find(token) != entries_.end();
}

// ---------------------------------------------------------------------------
// Noisers

std::string synonym_dropout_noise(std::string_view text, double intensity,
                                  const SynonymLexicon& lexicon, Rng& rng) {
  const auto tokens = tokenize(text);
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  bool touched = false;
  for (const auto& tok : tokens) {
    if (uniform_unit(rng) < intensity) {
      touched = true;
      const auto& syns = lexicon.synonyms(tok);
      if (!syns.empty()) kept.push_back(syns[uniform_index(rng, syns.size())]);
    } else {
      kept.push_back(tok);
    }
  }
  if (!touched) return std::string(text);
  if (kept.empty() && !tokens.empty()) kept.push_back(tokens[uniform_index(rng, tokens.size())]);
  return join_tokens(kept);
}

namespace {

constexpr std::string_view kFramePrefix[] = {"given", "that"};
constexpr std::string_view kFrameSuffix[] = {",", "so", "it", "goes", "."};

}  // namespace

std::string syntactic_noise(std::string_view text) {
  auto tokens = tokenize(text);
  const std::size_t np = std::size(kFramePrefix);
  const std::size_t ns = std::size(kFrameSuffix);
  bool framed = tokens.size() >= np + ns;
  for (std::size_t i = 0; framed && i < np; ++i) framed = tokens[i] == kFramePrefix[i];
  for (std::size_t i = 0; framed && i < ns; ++i) {
    framed = tokens[tokens.size() - ns + i] == kFrameSuffix[i];
  }
  std::vector<std::string> body;
  if (framed) {
    body.assign(tokens.begin() + static_cast<std::ptrdiff_t>(np),
                tokens.end() - static_cast<std::ptrdiff_t>(ns));
  } else {
    body = std::move(tokens);
    // The frame supplies its own terminal punctuation.
    while (!body.empty() && (body.back() == "." || body.back() == "!" || body.back() == "?")) {
      body.pop_back();
    }
  }
  std::vector<std::string> out(std::begin(kFramePrefix), std::end(kFramePrefix));
  out.insert(out.end(), body.begin(), body.end());
  out.insert(out.end(), std::begin(kFrameSuffix), std::end(kFrameSuffix));
  return join_tokens(out);
}

namespace {

std::string replace_all(std::string s, std::string_view from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

}  // namespace

std::vector<std::string> run_external_noiser(const std::string& command_template,
                                             const std::vector<std::string>& inputs,
                                             double intensity, std::uint64_t seed) {
  const auto tmp = std::filesystem::temp_directory_path();
  const std::string tag = std::to_string(seed) + "_" + std::to_string(fnv1a64(command_template));
  const auto in_path = tmp / ("ncl_noise_in_" + tag + ".txt");
  const auto out_path = tmp / ("ncl_noise_out_" + tag + ".txt");
  {
    std::ofstream in(in_path, std::ios::binary | std::ios::trunc);
    for (const auto& line : inputs) {
      for (char c : line) in.put(c == '\n' || c == '\r' ? ' ' : c);
      in.put('\n');
    }
  }
  std::ostringstream intensity_str;
  intensity_str << intensity;
  std::string command = replace_all(command_template, "{intensity}", intensity_str.str());
  command = replace_all(command, "{seed}", std::to_string(seed));
  const std::string full =
      "(" + command + ") < " + shell_quote(in_path.string()) + " > " + shell_quote(out_path.string());
  const int status = std::system(full.c_str());
  std::filesystem::remove(in_path);
  if (status != 0) {
    std::filesystem::remove(out_path);
    throw DataError("external noiser exited with status " + std::to_string(status) + ": " + command);
  }
  std::vector<std::string> outputs;
  {
    std::ifstream out(out_path, std::ios::binary);
    std::string line;
    while (std::getline(out, line)) outputs.push_back(line);
  }
  std::filesystem::remove(out_path);
  if (outputs.size() != inputs.size()) {
    throw DataError("external noiser returned " + std::to_string(outputs.size()) +
                    " lines for " + std::to_string(inputs.size()) + " inputs");
  }
  return outputs;
}

AugmentationSet augment_dataset(const Dataset& d0, const NoiserConfig& config,
                                const SynonymLexicon& lexicon) {
  config.validate();
  AugmentationSet set;
  set.original = d0;
  set.replicas.reserve(static_cast<std::size_t>(config.n));
  for (int i = 1; i <= config.n; ++i) {
    const double intensity = config.intensities[static_cast<std::size_t>(i - 1)];
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
    Dataset replica;
    replica.num_classes = d0.num_classes;
    replica.split = d0.split;
    replica.records.reserve(d0.size());

    std::vector<std::string> texts;
    if (config.kind == NoiserKind::external) {
      std::vector<std::string> inputs;
      inputs.reserve(d0.size());
      for (const auto& r : d0.records) inputs.push_back(r.text);
      texts = run_external_noiser(config.external_command, inputs, intensity, seed);
    } else {
      Rng rng(seed);
      texts.reserve(d0.size());
      for (const auto& r : d0.records) {
        texts.push_back(config.kind == NoiserKind::syntactic
                            ? syntactic_noise(r.text)
                            : synonym_dropout_noise(r.text, intensity, lexicon, rng));
      }
    }

    for (std::size_t k = 0; k < d0.size(); ++k) {
      const TextRecord& src = d0.records[k];
      TextRecord r;
      r.id = src.id + "#r" + std::to_string(i);
      r.text = std::move(texts[k]);
      r.label = src.label;
      r.origin_id = src.origin_id;
      r.replica_index = i;
      replica.records.push_back(std::move(r));
    }
    set.replicas.push_back(std::move(replica));
  }
  return set;
}

}  // namespace ncl
