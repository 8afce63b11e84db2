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

#include "ncl/label_correction.hpp"

#include <fstream>
#include <map>

#include "json.hpp"
#include "ncl/error.hpp"

namespace ncl {

using json = nlohmann::ordered_json;

Classifier train_unsafe_model(const Dataset& d0, const Vocabulary& vocab,
                              const EncoderConfig& model_config, TrainConfig train_config) {
  if (d0.empty()) throw DataError("cannot train the unsafe model on an empty dataset");
  train_config.objective.variant = LossVariant::ce;
  Classifier model = Classifier::create(vocab, model_config);
  train(model, d0, train_config);
  return model;
}

std::vector<LabelSet> relabel(const Classifier& model, const std::vector<Dataset>& replicas) {
  std::vector<LabelSet> out;
  out.reserve(replicas.size());
  for (const auto& r : replicas) {
    if (r.num_classes != model.encoder().config().num_classes) {
      throw DataError("replica class count does not match the model");
    }
    out.push_back(model.predict(r));
  }
  return out;
}

LabelSet vote(const std::vector<LabelSet>& label_sets, const LabelSet& original_labels) {
  if (label_sets.empty()) throw DataError("vote needs at least one label set");
  for (const auto& ls : label_sets) {
    if (ls.size() != original_labels.size()) {
      throw DataError("label set of size " + std::to_string(ls.size()) +
                      " misaligned with " + std::to_string(original_labels.size()) + " records");
    }
  }
  LabelSet out(original_labels.size());
  std::map<Label, std::size_t> counts;
  for (std::size_t k = 0; k < original_labels.size(); ++k) {
    counts.clear();
    for (const auto& ls : label_sets) ++counts[ls[k]];
    out[k] = original_labels[k];
    for (const auto& [label, c] : counts) {
      if (2 * c > label_sets.size()) out[k] = label;
    }
  }
  return out;
}

Dataset build_corrected_dataset(const AugmentationSet& aug, const LabelSet& corrected) {
  const Dataset& d0 = aug.original;
  if (corrected.size() != d0.size()) throw DataError("corrected labels misaligned with D0");
  Dataset out;
  out.num_classes = d0.num_classes;
  out.split = d0.split;
  out.records.reserve(d0.size() * (aug.n() + 1));
  auto append = [&](const Dataset& ds) {
    if (ds.size() != d0.size()) throw DataError("replica size differs from D0");
    for (std::size_t k = 0; k < ds.size(); ++k) {
      if (ds.records[k].origin_id != d0.records[k].origin_id) {
        throw DataError("replica record '" + ds.records[k].id + "' is not aligned with D0");
      }
      TextRecord r = ds.records[k];
      r.label = corrected[k];
      r.meta.reset();
      out.records.push_back(std::move(r));
    }
  };
  append(d0);
  for (const auto& replica : aug.replicas) append(replica);
  return out;
}

CorrectionReport score_correction(const Dataset& d0, const LabelSet& corrected,
                                  const Manifest* manifest) {
  if (corrected.size() != d0.size()) throw DataError("corrected labels misaligned with D0");
  CorrectionReport rep;
  std::size_t restored = 0;
  std::size_t flagged = 0;
  for (std::size_t k = 0; k < d0.size(); ++k) {
    const TextRecord& r = d0.records[k];
    const bool changed = corrected[k] != r.label;
    if (changed) {
      ++rep.num_changed;
      rep.changed_ids.push_back(r.id);
    }
    if (!manifest) continue;
    const auto it = manifest->find(r.id);
    if (it != manifest->end() && it->second.is_poisoned) {
      ++rep.num_poisoned;
      // The toxic label is the target; any change moves to a non-target class.
      restored += changed;
    } else {
      ++rep.num_clean;
      flagged += changed;
    }
  }
  if (manifest) {
    rep.scored = true;
    rep.recall = rep.num_poisoned ? static_cast<double>(restored) / static_cast<double>(rep.num_poisoned) : 0.0;
    rep.false_flag = rep.num_clean ? static_cast<double>(flagged) / static_cast<double>(rep.num_clean) : 0.0;
  }
  return rep;
}

std::string CorrectionReport::to_json() const {
  json j;
  j["num_changed"] = num_changed;
  j["changed_ids"] = changed_ids;
  if (scored) {
    j["num_poisoned"] = num_poisoned;
    j["num_clean"] = num_clean;
    j["recall"] = recall;
    j["false_flag"] = false_flag;
  } else {
    j["recall"] = nullptr;
    j["false_flag"] = nullptr;
  }
  return j.dump(2);
}

void CorrectionReport::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write correction report '" + path.string() + "'");
  out << to_json() << "\n";
}

}  // namespace ncl
