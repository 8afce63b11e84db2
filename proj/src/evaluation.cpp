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

#include "ncl/evaluation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "ncl/error.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

double compute_cacc(const Classifier& model, const Dataset& clean_test) {
  if (clean_test.empty()) throw DataError("CACC needs a nonempty clean test set");
  const auto pred = model.predict(clean_test);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == clean_test.records[i].label;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double compute_asr(const Classifier& model, const Dataset& poisoned_test, Label target_label) {
  if (poisoned_test.empty()) throw DataError("ASR needs a nonempty triggered test set");
  const auto pred = model.predict(poisoned_test);
  std::size_t hits = 0;
  for (Label p : pred) hits += p == target_label;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::optional<double> pearson_r(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("pearson_r needs equal-length vectors");
  const std::size_t n = a.size();
  if (n < 2) return std::nullopt;
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

PearsonResult pearson_analysis(const Classifier& model, const Dataset& benign,
                               const PoisonSpec& spec) {
  if (spec.kind == AttackKind::feature) {
    throw ConfigError("Pearson analysis needs an insertable (word or sentence) trigger");
  }
  if (model.encoder().config().embed_dim < 2) {
    throw ConfigError("Pearson analysis needs at least two embedding dimensions");
  }
  Rng rng(derive_seed(spec.seed, "evaluation.pearson"));
  std::vector<std::string> clean_texts;
  std::vector<std::string> triggered_texts;
  for (const auto& r : benign.records) {
    clean_texts.push_back(r.text);
    if (spec.trigger.empty()) {
      triggered_texts.push_back(r.text);
    } else {
      triggered_texts.push_back(apply_trigger(r.text, spec, StyleTable{}, rng).text);
    }
  }
  const Matrix clean = model.embed_texts(clean_texts);
  const Matrix triggered = model.embed_texts(triggered_texts);

  PearsonResult out;
  std::vector<double> values;
  for (std::size_t i = 0; i < benign.size(); ++i) {
    const Eigen::RowVectorXd a = clean.row(static_cast<Eigen::Index>(i));
    const Eigen::RowVectorXd b = triggered.row(static_cast<Eigen::Index>(i));
    PearsonSample s;
    s.id = benign.records[i].id;
    s.r = pearson_r(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                    std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
    if (s.r) {
      values.push_back(*s.r);
    } else {
      ++out.missing;
    }
    out.samples.push_back(std::move(s));
  }
  if (!values.empty()) {
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    out.median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  }
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void dump_embeddings(const Classifier& model, const Dataset& dataset,
                     const std::filesystem::path& path, const Manifest* manifest) {
  const Matrix emb = model.forward(dataset).embeddings;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write embeddings '" + path.string() + "'");
  out << "id,label,is_poisoned";
  for (Eigen::Index c = 0; c < emb.cols(); ++c) out << ",e" << c;
  out << "\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset.records[i];
    out << r.id << "," << r.label << ",";
    if (manifest) out << (manifest->count(r.id) ? 1 : 0);
    for (Eigen::Index c = 0; c < emb.cols(); ++c) {
      out << "," << format_double(emb(static_cast<Eigen::Index>(i), c));
    }
    out << "\n";
  }
}

std::string EvalReport::to_json() const {
  json j;
  j["arm"] = arm;
  j["cacc"] = cacc;
  j["asr"] = asr;
  j["delta_asr"] = delta_asr ? json(*delta_asr) : json(nullptr);
  if (correction) {
    j["correction"] = json::parse(correction->to_json());
  } else {
    j["correction"] = nullptr;
  }
  if (pearson_median) {
    j["pearson"] = {{"median", *pearson_median},
                    {"mean", pearson_mean ? json(*pearson_mean) : json(nullptr)},
                    {"path", pearson_path}};
  } else {
    j["pearson"] = nullptr;
  }
  j["config_fingerprint"] = config_fingerprint;
  return j.dump(2);
}

}  // namespace ncl
