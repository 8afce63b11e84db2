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

// nclbench: command-line driver for the backdoor-defense workbench.
//
//   nclbench [--config FILE] [--set key=value]... <command> [options]
//
// Commands: poison, defend, eval, sweep, analyze, make-data.
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncl/config.hpp"
#include "ncl/error.hpp"
#include "ncl/pipeline.hpp"
#include "ncl/toy_corpus.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw ncl::DataError("cannot write " + path.string());
}

fs::path make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ncl::DataError("cannot create directory " + dir.string() + ": " + ec.message());
  return dir;
}

void require_finite(std::initializer_list<double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ncl::NumericError(std::string("non-finite value in ") + what);
  }
}

ncl::Classifier load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw ncl::DataError("checkpoint not found: " + path.string());
  return ncl::Classifier::load(path);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------- poison

void cmd_poison(const ncl::ExperimentConfig& config) {
  const auto data = ncl::prepare_data(config);
  const auto dir = make_dir(config.output_dir() / "poison");
  ncl::save_dataset(data.train, dir / "train.jsonl");
  ncl::save_dataset(data.dev, dir / "dev.jsonl");
  ncl::save_dataset(data.test_poisoned, dir / "test_poisoned.jsonl");
  ncl::save_manifest(data.manifest, dir / "manifest.json");
  std::cout << "poisoned " << data.manifest.size() << " of " << data.train.size()
            << " training records; outputs in " << dir.string() << "\n";
}

// ---------------------------------------------------------------- defend

struct DefendOptions {
  std::string arm;
};

ncl::DefenseArm arm_for(const ncl::ExperimentConfig& config, const std::string& arm) {
  if (!arm.empty()) return ncl::parse_defense_arm(arm);
  switch (config.train().objective.variant) {
    case ncl::LossVariant::ncl: return ncl::DefenseArm::ncl;
    case ncl::LossVariant::uncl: return ncl::DefenseArm::uncl;
    case ncl::LossVariant::ce: return ncl::DefenseArm::wo_cl;
  }
  return ncl::DefenseArm::ncl;
}

void cmd_defend(const ncl::ExperimentConfig& config, const DefendOptions& options) {
  const auto arm = arm_for(config, options.arm);
  const auto data = ncl::prepare_data(config);
  const auto stage = ncl::run_correction(data, config);
  const auto result = ncl::train_defended(data, stage, config, arm);
  for (const auto& e : result.log.epochs) require_finite({e.total, e.ucl, e.scl, e.ce}, "training log");

  const auto dir = make_dir(config.output_dir() / "defend");
  const auto& labels = arm == ncl::DefenseArm::wo_lc ? stage.original : stage.corrected;
  ncl::save_dataset(ncl::build_corrected_dataset(stage.augmentation, labels), dir / "corrected.jsonl");
  stage.report.save(dir / "correction_report.json");
  result.model.save(dir / "model.ckpt");
  stage.unsafe.save(dir / "unsafe_model.ckpt");
  result.log.save(dir / "train_log.jsonl");
  if (!result.alpha_rows.empty()) write_text(dir / "alpha_selection.csv", ncl::alpha_rows_csv(result.alpha_rows));
  json summary;
  summary["arm"] = std::string(ncl::to_string(arm));
  summary["alpha"] = result.alpha;
  summary["num_changed"] = stage.report.num_changed;
  summary["recall"] = stage.report.recall;
  summary["false_flag"] = stage.report.false_flag;
  summary["config_fingerprint"] = config.fingerprint();
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "arm " << ncl::to_string(arm) << ", alpha " << result.alpha << ", relabelled "
            << stage.report.num_changed << " records (recall " << stage.report.recall
            << ", false-flag " << stage.report.false_flag << "); outputs in " << dir.string() << "\n";
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string model;
  std::string reference;
  bool onion = true;
};

void cmd_eval(const ncl::ExperimentConfig& config, const EvalOptions& options) {
  const fs::path defend_dir = config.output_dir() / "defend";
  const fs::path model_path = options.model.empty() ? defend_dir / "model.ckpt" : fs::path(options.model);
  const fs::path ref_path =
      options.reference.empty() ? defend_dir / "unsafe_model.ckpt" : fs::path(options.reference);
  const auto model = load_checkpoint(model_path);
  const auto reference = load_checkpoint(ref_path);
  const auto data = ncl::prepare_data(config);

  std::vector<ncl::EvalReport> reports;
  reports.push_back(ncl::evaluate(model, data, "defense", &reference, config));
  reports.push_back(ncl::evaluate(reference, data, "no_defense", &reference, config));
  if (options.onion) {
    const auto onion = ncl::run_onion(data, reference, config);
    ncl::EvalReport r;
    r.arm = "onion";
    r.cacc = onion.cacc;
    r.asr = onion.asr;
    r.delta_asr = reports[1].asr - onion.asr;
    r.config_fingerprint = config.fingerprint();
    reports.push_back(r);
  }
  json all = json::array();
  std::string csv = "arm,cacc,asr,delta_asr\n";
  for (const auto& r : reports) {
    require_finite({r.cacc, r.asr, r.delta_asr.value_or(0.0)}, "evaluation");
    all.push_back(json::parse(r.to_json()));
    csv += r.arm + "," + ncl::format_double(r.cacc) + "," + ncl::format_double(r.asr) + "," +
           (r.delta_asr ? ncl::format_double(*r.delta_asr) : "") + "\n";
  }
  const auto dir = make_dir(config.output_dir() / "eval");
  write_text(dir / "eval_report.json", all.dump(2) + "\n");
  write_text(dir / "eval_report.csv", csv);
  std::cout << csv;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::string over = "rate";
  std::vector<double> rates;
};

void cmd_sweep(ncl::ExperimentConfig config, const SweepOptions& options) {
  const auto dir = make_dir(config.output_dir() / "sweep");
  if (options.over == "rate") {
    std::vector<double> rates = options.rates;
    if (rates.empty()) rates = config.at("sweep.rates").get<std::vector<double>>();
    const auto rows = ncl::sweep_rates(config, rates);
    for (const auto& r : rows) require_finite({r.cacc, r.asr}, "rate sweep");
    write_text(dir / "rate_sweep.csv", ncl::rate_rows_csv(rows));
    if (config.plots()) {
      std::vector<ncl::PlotSeries> series{{"defense", {}, {}}, {"no_defense", {}, {}}};
      for (const auto& r : rows) {
        auto& s = series[r.arm == "defense" ? 0 : 1];
        s.x.push_back(r.rate);
        s.y.push_back(r.asr);
      }
      write_text(dir / "rate_sweep.svg", ncl::line_plot_svg("ASR by poisoning rate", "rate", "ASR", series));
    }
    std::cout << ncl::rate_rows_csv(rows);
    return;
  }
  if (options.over != "alpha") throw ncl::ConfigError("--over must be 'rate' or 'alpha'");
  config.set("select.enabled", true);
  const auto data = ncl::prepare_data(config);
  const auto stage = ncl::run_correction(data, config);
  const auto result = ncl::train_defended(data, stage, config, ncl::DefenseArm::ncl);
  for (const auto& r : result.alpha_rows) require_finite({r.dev_accuracy, r.cacc, r.asr}, "alpha sweep");
  write_text(dir / "alpha_sweep.csv", ncl::alpha_rows_csv(result.alpha_rows));
  json j;
  j["recommended_alpha"] = result.alpha;
  j["tolerance"] = config.alpha_selection().tolerance;
  j["rows"] = json::array();
  for (const auto& r : result.alpha_rows) {
    j["rows"].push_back({{"alpha", r.alpha}, {"dev_accuracy", r.dev_accuracy}, {"cacc", r.cacc}, {"asr", r.asr}});
  }
  j["config_fingerprint"] = config.fingerprint();
  write_text(dir / "alpha_sweep.json", j.dump(2) + "\n");
  if (config.plots()) {
    std::vector<ncl::PlotSeries> series{{"ASR", {}, {}}, {"CACC", {}, {}}};
    for (const auto& r : result.alpha_rows) {
      series[0].x.push_back(r.alpha);
      series[0].y.push_back(r.asr);
      series[1].x.push_back(r.alpha);
      series[1].y.push_back(r.cacc);
    }
    write_text(dir / "alpha_sweep.svg", ncl::line_plot_svg("Metrics by alpha", "alpha", "value", series));
  }
  std::cout << ncl::alpha_rows_csv(result.alpha_rows) << "recommended_alpha," << result.alpha << "\n";
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOptions {
  std::string model;
  std::string baseline;
  bool identity_trigger = false;
};

void cmd_analyze(const ncl::ExperimentConfig& config, const AnalyzeOptions& options) {
  const fs::path defend_dir = config.output_dir() / "defend";
  const fs::path model_path = options.model.empty() ? defend_dir / "model.ckpt" : fs::path(options.model);
  const fs::path base_path =
      options.baseline.empty() ? defend_dir / "unsafe_model.ckpt" : fs::path(options.baseline);
  const auto ncl_model = load_checkpoint(model_path);
  const auto ce_model = load_checkpoint(base_path);
  const auto data = ncl::prepare_data(config);
  const auto sample = ncl::sample_records(data.test, config.pearson_samples(), config.sub_seed("analyze.sample"));
  ncl::PoisonSpec spec = data.spec;
  if (options.identity_trigger) spec.trigger.clear();

  const auto dir = make_dir(config.output_dir() / "analyze");
  std::string csv = "model,id,r\n";
  json summary;
  std::optional<double> medians[2];
  const std::pair<const char*, const ncl::Classifier*> models[] = {{"ncl", &ncl_model}, {"ce", &ce_model}};
  for (std::size_t m = 0; m < 2; ++m) {
    const auto res = ncl::pearson_analysis(*models[m].second, sample, spec);
    for (const auto& s : res.samples) {
      csv += std::string(models[m].first) + "," + s.id + "," + (s.r ? ncl::format_double(*s.r) : "") + "\n";
    }
    medians[m] = res.median;
    summary[models[m].first] = {{"samples", res.samples.size()},
                                {"missing", res.missing},
                                {"median", opt(res.median)},
                                {"mean", opt(res.mean)}};
  }
  std::string ordering = "undefined";
  if (medians[0] && medians[1]) {
    ordering = *medians[0] > *medians[1] ? "ncl>ce" : *medians[0] < *medians[1] ? "ncl<ce" : "ncl=ce";
  }
  summary["ordering"] = ordering;
  summary["config_fingerprint"] = config.fingerprint();
  write_text(dir / "pearson.csv", csv);
  write_text(dir / "pearson_summary.json", summary.dump(2) + "\n");
  ncl::dump_embeddings(ncl_model, data.train, dir / "embeddings_ncl.csv", &data.manifest);
  ncl::dump_embeddings(ce_model, data.train, dir / "embeddings_ce.csv", &data.manifest);
  std::cout << summary.dump(2) << "\n";
}

// ---------------------------------------------------------------- make-data

void cmd_make_data(const ncl::ExperimentConfig& config, const std::string& dir_arg) {
  const auto dir = make_dir(dir_arg);
  ncl::save_dataset(ncl::generate_toy_corpus(config.toy_options()), dir / "toy_sentiment.jsonl");
  ncl::SynonymLexicon::builtin().save(dir / "synonyms.json");
  ncl::StyleTable::builtin().save(dir / "style_table.json");
  std::cout << "wrote toy corpus, synonym lexicon and style table to " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nclbench: backdoor poisoning and noise-augmented contrastive defense workbench"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the command name
  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "flat JSON config file (dotted keys)");
  app.add_option("-s,--set", overrides, "override a config key: key=value (repeatable)");

  auto* poison = app.add_subcommand("poison", "write poisoned train/dev/test splits and the manifest");

  DefendOptions defend_opts;
  std::string objective;
  auto* defend = app.add_subcommand("defend", "augment, correct labels and train the defended model");
  defend->add_option("--objective", objective, "loss variant: ncl, uncl or ce");
  defend->add_option("--arm", defend_opts.arm, "training arm: ncl, uncl, wo_cl or wo_lc");

  EvalOptions eval_opts;
  auto* eval = app.add_subcommand("eval", "measure CACC, ASR and delta-ASR of stored checkpoints");
  eval->add_option("--model", eval_opts.model, "defended checkpoint (default: <out>/defend/model.ckpt)");
  eval->add_option("--reference", eval_opts.reference,
                   "undefended checkpoint (default: <out>/defend/unsafe_model.ckpt)");
  eval->add_flag("!--no-onion", eval_opts.onion, "skip the perplexity-filter baseline row");

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "sweep the poisoning rate or alpha");
  sweep->add_option("--over", sweep_opts.over, "swept parameter: rate or alpha");
  sweep->add_option("--rates", sweep_opts.rates, "poisoning rates (default: sweep.rates)");

  AnalyzeOptions analyze_opts;
  auto* analyze = app.add_subcommand("analyze", "Pearson stability analysis and embedding dumps");
  analyze->add_option("--model", analyze_opts.model, "contrastively trained checkpoint");
  analyze->add_option("--baseline", analyze_opts.baseline, "cross-entropy checkpoint");
  analyze->add_flag("--identity-trigger", analyze_opts.identity_trigger,
                    "control run with an empty trigger (every r must be 1)");

  std::string data_dir = "data";
  auto* make_data = app.add_subcommand("make-data", "write the toy corpus, lexicon and style table");
  make_data->add_option("--dir", data_dir, "destination directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ncl::ExperimentConfig config = config_path.empty() ? ncl::ExperimentConfig()
                                                       : ncl::ExperimentConfig::load(config_path);
    for (const auto& o : overrides) config.apply_override(o);
    if (!objective.empty()) config.set("objective.variant", objective);

    if (poison->parsed()) cmd_poison(config);
    if (defend->parsed()) cmd_defend(config, defend_opts);
    if (eval->parsed()) cmd_eval(config, eval_opts);
    if (sweep->parsed()) cmd_sweep(config, sweep_opts);
    if (analyze->parsed()) cmd_analyze(config, analyze_opts);
    if (make_data->parsed()) cmd_make_data(config, data_dir);
  } catch (const ncl::ConfigError& e) {
    std::cerr << "nclbench: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "nclbench: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
