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

#include "ncl/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "ncl/error.hpp"
#include "ncl/rng.hpp"

namespace ncl {

namespace {

using Json = ExperimentConfig::Json;

Json default_values() {
  Json j;
  j["seed"] = 13;
  j["output.dir"] = "out";
  j["data.path"] = "";
  j["data.num_classes"] = 2;
  j["data.min_freq"] = 2;
  j["data.fractions"] = {0.7, 0.1, 0.2};
  j["data.synonyms"] = "";
  j["data.style_table"] = "";
  j["toy.size"] = 3000;
  j["toy.positive_fraction"] = 0.3;
  j["toy.mixed_fraction"] = 0.2;
  j["toy.seed"] = 20240601;
  j["attack.kind"] = "word";
  j["attack.trigger"] = "";
  j["attack.target_label"] = 1;
  j["attack.rate"] = 0.1;
  j["attack.placement"] = "";
  j["noise.kind"] = "synonym_dropout";
  j["noise.n"] = 3;
  j["noise.intensities"] = {0.5, 0.7, 0.9};
  j["noise.command"] = "";
  j["model.embed_dim"] = 64;
  j["model.hidden_dim"] = 128;
  j["model.num_heads"] = 2;
  j["model.pooling"] = "cls_attention";
  j["model.max_len"] = 64;
  j["model.zero_head"] = true;
  j["train.batch_groups"] = 8;
  j["train.epochs"] = 10;
  j["train.learning_rate"] = 1e-3;
  j["train.optimizer"] = "adam";
  j["train.momentum"] = 0.9;
  j["train.clip_norm"] = 5.0;
  j["objective.variant"] = "ncl";
  j["objective.alpha"] = 1.0;
  j["objective.beta"] = 0.1;
  j["objective.gamma"] = 0.9;
  j["objective.tau0"] = 0.3;
  j["objective.tau1"] = 0.05;
  j["objective.pair_normalization"] = "batch";
  j["select.enabled"] = true;
  j["select.alphas"] = {1.0, 2.0, 4.0, 8.0};
  j["select.tolerance"] = 0.01;
  j["onion.order"] = 2;
  j["onion.smoothing"] = 0.1;
  j["onion.percentile"] = 0.95;
  j["onion.calibration_size"] = 500;
  j["eval.pearson_samples"] = 300;
  j["eval.plots"] = false;
  j["sweep.rates"] = {0.05, 0.1, 0.2, 0.3, 0.5};
  return j;
}

const Json& defaults() {
  static const Json d = default_values();
  return d;
}

std::string key_str(std::string_view key) { return std::string(key); }

// Coerces `value` to the JSON type of `reference`, or throws.
Json coerce(std::string_view key, const Json& reference, const Json& value) {
  const auto fail = [&](std::string_view expected) -> Json {
    throw ConfigError("config key '" + key_str(key) + "' expects " + std::string(expected) +
                      ", got " + value.dump());
  };
  if (reference.is_boolean()) return value.is_boolean() ? value : fail("a boolean");
  if (reference.is_string()) return value.is_string() ? value : fail("a string");
  if (reference.is_number_integer()) {
    if (value.is_number_unsigned() || value.is_number_integer()) return value;
    if (value.is_number_float()) {
      const double d = value.get<double>();
      if (d == static_cast<double>(static_cast<long long>(d))) return static_cast<long long>(d);
    }
    return fail("an integer");
  }
  if (reference.is_number_float()) {
    return value.is_number() ? Json(value.get<double>()) : fail("a number");
  }
  if (reference.is_array()) {
    if (!value.is_array()) return fail("an array of numbers");
    Json out = Json::array();
    for (const auto& v : value) {
      if (!v.is_number()) return fail("an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  return fail("a supported type");
}

template <typename T>
T get_number(const ExperimentConfig& c, std::string_view key) {
  return c.at(key).get<T>();
}

int get_int(const ExperimentConfig& c, std::string_view key) {
  const auto v = c.at(key).get<long long>();
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError("config key '" + key_str(key) + "' out of range");
  return static_cast<int>(v);
}

std::size_t get_count(const ExperimentConfig& c, std::string_view key) {
  const auto v = c.at(key).get<long long>();
  if (v < 0) throw ConfigError("config key '" + key_str(key) + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

std::string get_string(const ExperimentConfig& c, std::string_view key) {
  return c.at(key).get<std::string>();
}

std::vector<double> get_list(const ExperimentConfig& c, std::string_view key) {
  return c.at(key).get<std::vector<double>>();
}

}  // namespace

ExperimentConfig::ExperimentConfig() : values_(defaults()) {}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file " + path.string() + " must hold a JSON object");
  ExperimentConfig config;
  for (const auto& [key, value] : j.items()) config.set(key, value);
  return config;
}

void ExperimentConfig::set(std::string_view key, const Json& value) {
  const auto it = defaults().find(key_str(key));
  if (it == defaults().end()) throw ConfigError("unknown config key '" + key_str(key) + "'");
  values_[key_str(key)] = coerce(key, *it, value);
}

void ExperimentConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  Json value = Json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw;
  set(key, value);
}

const Json& ExperimentConfig::at(std::string_view key) const {
  const auto it = values_.find(key_str(key));
  if (it == values_.end()) throw ConfigError("unknown config key '" + key_str(key) + "'");
  return *it;
}

std::string ExperimentConfig::dump() const { return values_.dump(2); }

std::string ExperimentConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(values_.dump())));
  return buf;
}

std::uint64_t ExperimentConfig::seed() const {
  const auto& v = at("seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto s = v.get<long long>();
  if (s < 0) throw ConfigError("seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

std::uint64_t ExperimentConfig::sub_seed(std::string_view component) const {
  return derive_seed(seed(), component);
}

std::filesystem::path ExperimentConfig::output_dir() const {
  if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') return env;
  const auto dir = get_string(*this, "output.dir");
  if (dir.empty()) throw ConfigError("output.dir must not be empty");
  return dir;
}

std::filesystem::path ExperimentConfig::data_path() const {
  const std::filesystem::path p = get_string(*this, "data.path");
  if (!p.empty() && !std::filesystem::exists(p)) {
    throw ConfigError("data.path does not exist: " + p.string());
  }
  return p;
}

ToyCorpusOptions ExperimentConfig::toy_options() const {
  ToyCorpusOptions o;
  o.size = get_count(*this, "toy.size");
  o.positive_fraction = get_number<double>(*this, "toy.positive_fraction");
  o.mixed_fraction = get_number<double>(*this, "toy.mixed_fraction");
  o.seed = static_cast<std::uint64_t>(get_count(*this, "toy.seed"));
  if (o.size < 10) throw ConfigError("toy.size must be at least 10");
  if (!(o.positive_fraction > 0.0 && o.positive_fraction < 1.0)) {
    throw ConfigError("toy.positive_fraction must lie in (0, 1)");
  }
  if (!(o.mixed_fraction >= 0.0 && o.mixed_fraction <= 1.0)) {
    throw ConfigError("toy.mixed_fraction must lie in [0, 1]");
  }
  return o;
}

std::vector<double> ExperimentConfig::split_fractions() const {
  auto f = get_list(*this, "data.fractions");
  if (f.size() != 3) throw ConfigError("data.fractions must list three fractions (train, dev, test)");
  return f;
}

int ExperimentConfig::num_classes() const {
  const int c = get_int(*this, "data.num_classes");
  if (c < 2) throw ConfigError("data.num_classes must be >= 2");
  return c;
}

int ExperimentConfig::min_freq() const {
  const int m = get_int(*this, "data.min_freq");
  if (m < 1) throw ConfigError("data.min_freq must be >= 1");
  return m;
}

SynonymLexicon ExperimentConfig::lexicon() const {
  const std::filesystem::path p = get_string(*this, "data.synonyms");
  if (p.empty()) return SynonymLexicon::builtin();
  if (!std::filesystem::exists(p)) throw ConfigError("data.synonyms does not exist: " + p.string());
  return SynonymLexicon::load(p);
}

StyleTable ExperimentConfig::style_table() const {
  const std::filesystem::path p = get_string(*this, "data.style_table");
  if (p.empty()) return StyleTable::builtin();
  if (!std::filesystem::exists(p)) throw ConfigError("data.style_table does not exist: " + p.string());
  return StyleTable::load(p);
}

PoisonSpec ExperimentConfig::poison_spec() const {
  PoisonSpec spec;
  spec.kind = parse_attack_kind(get_string(*this, "attack.kind"));
  spec.trigger = get_string(*this, "attack.trigger");
  if (spec.trigger.empty()) {
    spec.trigger = spec.kind == AttackKind::sentence ? std::string(kDefaultSentenceTrigger) : "cf";
  }
  const auto placement = get_string(*this, "attack.placement");
  if (placement.empty()) {
    spec.placement = spec.kind == AttackKind::sentence ? Placement::head : Placement::random;
  } else {
    spec.placement = parse_placement(placement);
  }
  spec.target_label = get_int(*this, "attack.target_label");
  spec.rate = get_number<double>(*this, "attack.rate");
  spec.seed = sub_seed("attack");
  spec.validate(num_classes());
  return spec;
}

NoiserConfig ExperimentConfig::noiser() const {
  NoiserConfig n;
  n.kind = parse_noiser_kind(get_string(*this, "noise.kind"));
  n.n = get_int(*this, "noise.n");
  n.intensities = get_list(*this, "noise.intensities");
  n.external_command = get_string(*this, "noise.command");
  n.base_seed = sub_seed("noise");
  n.validate();
  return n;
}

EncoderConfig ExperimentConfig::encoder(int vocab_size) const {
  EncoderConfig e;
  e.vocab_size = vocab_size;
  e.embed_dim = get_int(*this, "model.embed_dim");
  e.hidden_dim = get_int(*this, "model.hidden_dim");
  e.num_heads = get_int(*this, "model.num_heads");
  e.pooling = parse_pooling(get_string(*this, "model.pooling"));
  e.max_len = get_int(*this, "model.max_len");
  e.num_classes = num_classes();
  e.zero_head = at("model.zero_head").get<bool>();
  e.seed = sub_seed("model");
  e.validate();
  return e;
}

TrainConfig ExperimentConfig::train() const {
  TrainConfig t;
  t.batch_groups = get_int(*this, "train.batch_groups");
  t.epochs = get_int(*this, "train.epochs");
  t.learning_rate = get_number<double>(*this, "train.learning_rate");
  t.optimizer = parse_optimizer(get_string(*this, "train.optimizer"));
  t.momentum = get_number<double>(*this, "train.momentum");
  t.clip_norm = get_number<double>(*this, "train.clip_norm");
  t.seed = sub_seed("train");
  ObjectiveConfig& o = t.objective;
  o.variant = parse_loss_variant(get_string(*this, "objective.variant"));
  o.alpha = get_number<double>(*this, "objective.alpha");
  o.beta = get_number<double>(*this, "objective.beta");
  o.gamma = get_number<double>(*this, "objective.gamma");
  o.tau0 = get_number<double>(*this, "objective.tau0");
  o.tau1 = get_number<double>(*this, "objective.tau1");
  o.pair_normalization = parse_pair_normalization(get_string(*this, "objective.pair_normalization"));
  t.validate();
  return t;
}

AlphaSelection ExperimentConfig::alpha_selection() const {
  AlphaSelection s;
  s.enabled = at("select.enabled").get<bool>();
  s.candidates = get_list(*this, "select.alphas");
  s.tolerance = get_number<double>(*this, "select.tolerance");
  if (s.candidates.empty()) throw ConfigError("select.alphas must not be empty");
  for (double a : s.candidates) {
    if (!(a >= 0.0)) throw ConfigError("select.alphas entries must be >= 0");
  }
  if (!(s.tolerance >= 0.0)) throw ConfigError("select.tolerance must be >= 0");
  return s;
}

OnionConfig ExperimentConfig::onion() const {
  OnionConfig o;
  o.order = get_int(*this, "onion.order");
  o.smoothing = get_number<double>(*this, "onion.smoothing");
  o.percentile = get_number<double>(*this, "onion.percentile");
  o.calibration_size = get_count(*this, "onion.calibration_size");
  if (o.order < 1) throw ConfigError("onion.order must be >= 1");
  if (!(o.smoothing > 0.0)) throw ConfigError("onion.smoothing must be > 0");
  if (!(o.percentile >= 0.0 && o.percentile <= 1.0)) throw ConfigError("onion.percentile must lie in [0, 1]");
  if (o.calibration_size == 0) throw ConfigError("onion.calibration_size must be > 0");
  return o;
}

std::size_t ExperimentConfig::pearson_samples() const {
  const auto n = get_count(*this, "eval.pearson_samples");
  if (n == 0) throw ConfigError("eval.pearson_samples must be > 0");
  return n;
}

bool ExperimentConfig::plots() const { return at("eval.plots").get<bool>(); }

}  // namespace ncl
