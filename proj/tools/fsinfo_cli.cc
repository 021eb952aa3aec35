// Copyright 2026 The fsinfo-audit Authors
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

// fsinfo: command-line driver for split-inference leakage audits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsinfo/correlation.h"
#include "fsinfo/defense.h"
#include "fsinfo/errors.h"
#include "fsinfo/experiment.h"
#include "fsinfo/fisher_metric.h"
#include "fsinfo/model_io.h"
#include "fsinfo/trainer.h"

namespace {

using namespace fsinfo;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
};

void AddCommon(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path,
                  "INI config file (default: built-in reference config)");
  cmd->add_option("-s,--set", opts.overrides,
                  "Override a config value, e.g. --set train.epochs=5");
  cmd->add_option("-o,--out", opts.out, "Output run directory (run.output)");
}

ExperimentConfig Resolve(const CommonOptions& opts) {
  KeyValueConfig raw = opts.config_path.empty()
                           ? KeyValueConfig::Parse(ReferenceConfigText())
                           : KeyValueConfig::Load(opts.config_path);
  for (const auto& o : opts.overrides) raw.SetAssignment(o);
  if (!opts.out.empty()) raw.Set("run.output", opts.out);
  ExperimentConfig cfg = ParseExperimentConfig(raw);
  if (cfg.output_dir.empty()) {
    throw ParameterError("no output directory; pass --out or set run.output");
  }
  return cfg;
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void PrintSummary(const SweepReport& report, const std::string& dir) {
  std::size_t failed = 0;
  for (const auto& r : report.rows) {
    if (!r.ok()) {
      ++failed;
      std::cerr << "row failed (" << r.experiment << "): " << r.error << '\n';
    }
  }
  std::cout << report.rows.size() << " rows, " << failed << " failed -> "
            << dir << "/report.csv\n";
}

int Finish(const SweepReport& report, const ExperimentConfig& cfg) {
  WriteRunDirectory(cfg.output_dir, report, cfg);
  PrintSummary(report, cfg.output_dir);
  return report.AnyFailed() ? 1 : 0;
}

int CmdTrain(const CommonOptions& opts) {
  const ExperimentConfig cfg = Resolve(opts);
  const Workspace ws = LoadWorkspace(cfg);
  TrainingTrace trace;
  const SplitNet net = TrainModel(cfg, ws, std::nullopt, &trace);

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    throw ParameterError("output directory " + cfg.output_dir +
                         " is not empty");
  }
  fs::create_directories(dir);
  SaveParameters(net, (dir / "model.bin").string());
  std::ofstream csv(dir / "train.csv");
  csv << "epoch,sigma,train_loss,train_accuracy,test_loss,test_accuracy\n";
  for (const auto& e : trace.epochs) {
    csv << e.epoch << ',' << Fmt(e.sigma) << ',' << Fmt(e.train_loss) << ','
        << Fmt(e.train_accuracy) << ',' << Fmt(e.test_loss) << ','
        << Fmt(e.test_accuracy) << '\n';
  }
  std::ofstream(dir / "run.meta") << RunMeta(cfg);
  const auto eval = Evaluate(net, ws.test);
  std::cout << "test accuracy " << Fmt(eval.accuracy) << ", model -> "
            << (dir / "model.bin").string() << '\n';
  return 0;
}

int CmdAudit(const CommonOptions& opts) {
  const ExperimentConfig cfg = Resolve(opts);
  SweepReport report = RunAuditSweep(cfg);
  if (!cfg.width_multipliers.empty()) {
    SweepReport width = RunWidthStudy(cfg);
    report.rows.insert(report.rows.end(), width.rows.begin(), width.rows.end());
  }
  return Finish(report, cfg);
}

int CmdAttack(const CommonOptions& opts) {
  ExperimentConfig cfg = Resolve(opts);
  if (!cfg.attack) throw ParameterError("attack.method is none");
  cfg.split_points = {cfg.split_point};
  cfg.audit_sigmas.resize(1);
  SweepReport report = RunAuditSweep(cfg);
  for (auto& r : report.rows) r.experiment = "attack";
  return Finish(report, cfg);
}

int CmdCalibrate(const CommonOptions& opts) {
  const ExperimentConfig cfg = Resolve(opts);
  if (cfg.defense_strengths.empty()) {
    throw ParameterError("calibrate needs defense.strengths");
  }
  const Workspace ws = LoadWorkspace(cfg);
  const SplitNet net = TrainModel(cfg, ws);
  std::vector<Tensor> samples(
      ws.test.inputs.begin(),
      ws.test.inputs.begin() +
          static_cast<std::ptrdiff_t>(std::min(cfg.audit_samples, ws.test.size())));
  std::vector<Tensor> calibration(
      ws.train.inputs.begin(),
      ws.train.inputs.begin() +
          static_cast<std::ptrdiff_t>(
              std::min(cfg.calibration_samples, ws.train.size())));
  SweepReport report;
  std::string per_sample = "defense_strength,sample_index,sigma\n";
  for (double strength : cfg.defense_strengths) {
    SweepRow row;
    row.experiment = "calibrate";
    row.split_point = cfg.split_point;
    row.defense_scheme = SchemeName(cfg.defense_scheme);
    row.defense_strength = strength;
    try {
      const NoisePlan plan =
          PlanForStrength(cfg.defense_scheme, strength, cfg.defense_granularity);
      const NoiseChannel channel(net, plan, calibration);
      std::vector<double> sigmas;
      for (const auto& x : samples) sigmas.push_back(channel.SigmaFor(x));
      for (std::size_t i = 0; i < sigmas.size(); ++i) {
        per_sample += Fmt(strength) + ',' + std::to_string(i) + ',' +
                      Fmt(sigmas[i]) + '\n';
      }
      const auto leak =
          FsinfoDatasetPerSample(net, samples, sigmas, cfg.subsample);
      row.sigma = leak.sigma;
      row.fsinfo_mean = leak.mean_fsinfo;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  const int status = Finish(report, cfg);
  std::ofstream(std::filesystem::path(cfg.output_dir) / "sigmas.csv")
      << per_sample;
  return status;
}

int CmdDefendSweep(const CommonOptions& opts) {
  const ExperimentConfig cfg = Resolve(opts);
  return Finish(RunDefenseSweep(cfg), cfg);
}

int CmdOverfit(const CommonOptions& opts) {
  const ExperimentConfig cfg = Resolve(opts);
  return Finish(RunOverfittingStudy(cfg), cfg);
}

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string dat;
  std::string x = "fsinfo_mean";
  std::string y = "attack_mse";
};

std::optional<double> Column(const SweepRow& r, const std::string& name) {
  if (name == "fsinfo_mean") return r.fsinfo_mean;
  if (name == "attack_mse") return r.attack_mse;
  if (name == "attack_ssim") return r.attack_ssim;
  if (name == "task_accuracy") return r.task_accuracy;
  if (name == "sigma") return r.sigma;
  if (name == "defense_strength") return r.defense_strength;
  throw ParameterError("unknown numeric column '" + name + "'");
}

int CmdReport(const ReportOptions& opts) {
  SweepReport merged;
  for (const auto& path : opts.inputs) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read " + path);
    std::stringstream text;
    text << in.rdbuf();
    SweepReport part = SweepReport::FromCsv(text.str());
    merged.rows.insert(merged.rows.end(), part.rows.begin(), part.rows.end());
  }
  // Group by experiment (and scheme, for defense rows).
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      groups;
  for (const auto& r : merged.rows) {
    if (!r.ok()) continue;
    const auto x = Column(r, opts.x);
    const auto y = Column(r, opts.y);
    if (!x || !y) continue;
    std::string key = r.experiment;
    if (r.defense_scheme) key += "/" + *r.defense_scheme;
    groups[key].first.push_back(*x);
    groups[key].second.push_back(*y);
  }
  std::cout << "group,n,spearman,pearson\n";
  for (const auto& [key, xy] : groups) {
    std::cout << key << ',' << xy.first.size();
    for (auto kind : {CorrelationKind::kSpearman, CorrelationKind::kPearson}) {
      std::cout << ',';
      try {
        std::cout << Fmt(Correlation(xy.first, xy.second, kind));
      } catch (const ParameterError&) {
        std::cout << "nan";
      }
    }
    std::cout << '\n';
  }
  if (!opts.dat.empty()) {
    std::ofstream(opts.dat) << merged.ToGnuplot();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information leakage audits for split inference"};
  app.require_subcommand(1);

  CommonOptions common;
  ReportOptions report;
  std::map<std::string, std::function<int()>> handlers;
  auto add = [&](const char* name, const char* help, int (*fn)(const CommonOptions&)) {
    auto* cmd = app.add_subcommand(name, help);
    AddCommon(cmd, common);
    handlers[name] = [fn, &common] { return fn(common); };
  };
  add("train", "Train the configured model and save its parameters", CmdTrain);
  add("audit", "Split-point sweep: FSInfo, attack error, accuracy", CmdAudit);
  add("attack", "Reconstruction attack at model.split_point", CmdAttack);
  add("calibrate", "Per-strength noise calibration for the configured scheme",
      CmdCalibrate);
  add("defend-sweep", "Train and audit under each defense strength",
      CmdDefendSweep);
  add("overfit-study", "FSInfo across training checkpoints", CmdOverfit);

  auto* rep = app.add_subcommand("report", "Correlation statistics over report CSVs");
  rep->add_option("inputs", report.inputs, "report.csv files")->required();
  rep->add_option("--dat", report.dat, "Write merged gnuplot data here");
  rep->add_option("--x", report.x, "x column")->capture_default_str();
  rep->add_option("--y", report.y, "y column")->capture_default_str();
  handlers["report"] = [&report] { return CmdReport(report); };

  CLI11_PARSE(app, argc, argv);
  try {
    for (auto* sub : app.get_subcommands()) {
      return handlers.at(sub->get_name())();
    }
  } catch (const fsinfo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
