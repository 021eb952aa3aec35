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

#include "fsinfo/experiment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Core>

#include "fsinfo/errors.h"
#include "fsinfo/rng.h"

namespace fsinfo {
namespace {

constexpr const char* kVersion = "0.1.0";

// Seed streams fanned out from [run] seed.
constexpr std::uint64_t kDataStream = 10;
constexpr std::uint64_t kModelInitStream = 11;
constexpr std::uint64_t kTrainStream = 12;
constexpr std::uint64_t kAttackStream = 13;
constexpr std::uint64_t kSubsampleStream = 14;
constexpr std::uint64_t kDefenseNoiseStream = 15;

std::vector<std::string> SplitNames(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

template <typename T>
std::string JoinNumbers(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += FormatNumber(static_cast<double>(values[i]));
  }
  return out;
}

std::size_t NonNegative(std::int64_t v, const char* key) {
  if (v < 0) throw ParameterError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::vector<Tensor> Head(const LabeledDataset& ds, std::size_t n) {
  n = std::min(n, ds.size());
  return {ds.inputs.begin(), ds.inputs.begin() + n};
}

}  // namespace

ExperimentConfig ParseExperimentConfig(const KeyValueConfig& config) {
  ExperimentConfig cfg;
  KeyValueConfig& r = cfg.resolved;
  r = config;
  auto str = [&](const std::string& key, const std::string& fallback) {
    std::string v = r.GetString(key, fallback);
    r.Set(key, v);
    return v;
  };
  auto num = [&](const std::string& key, double fallback) {
    double v = r.GetDouble(key, fallback);
    r.Set(key, FormatNumber(v));
    return v;
  };
  auto integer = [&](const std::string& key, std::int64_t fallback) {
    std::int64_t v = r.GetInt(key, fallback);
    r.Set(key, std::to_string(v));
    return v;
  };

  const auto seed = integer("run.seed", 0);
  if (seed < 0) throw ParameterError("run.seed must be >= 0");
  if (!config.Has("run.seed")) {
    throw ParameterError("run.seed is mandatory");
  }
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.output_dir = str("run.output", "");

  const std::string source = str("data.source", "synthetic");
  if (source == "synthetic") {
    cfg.data.source = DataSpec::Source::kSynthetic;
    cfg.data.synthetic = ParseSynthKind(str("data.synthetic", "bimodal_digits"));
  } else if (source == "idx") {
    cfg.data.source = DataSpec::Source::kIdx;
    cfg.data.images_path = r.Require("data.images");
    cfg.data.labels_path = r.Require("data.labels");
  } else if (source == "csv") {
    cfg.data.source = DataSpec::Source::kCsv;
    cfg.data.csv_path = r.Require("data.csv");
    cfg.data.label_column = r.Require("data.label_column");
    cfg.data.onehot_columns = SplitNames(str("data.onehot_columns", ""));
  } else {
    throw ParameterError("data.source must be synthetic, idx or csv");
  }
  cfg.data.downsample = NonNegative(integer("data.downsample", 1),
                                    "data.downsample");
  cfg.data.n_train = NonNegative(integer("data.n_train", 500), "data.n_train");
  cfg.data.n_aux = NonNegative(integer("data.n_aux", 200), "data.n_aux");
  cfg.data.n_test = NonNegative(integer("data.n_test", 100), "data.n_test");
  if (cfg.data.n_train == 0 || cfg.data.n_test == 0) {
    throw ParameterError("data.n_train and data.n_test must be > 0");
  }

  if (auto path = r.Get("model.params"); path && !path->empty()) {
    cfg.model_path = *path;
  }
  if (cfg.model_path && !r.Has("model.layers")) {
    cfg.layers = LoadParameters(*cfg.model_path).specs();
    r.Set("model.layers", LayerSpecsToString(cfg.layers));
  } else {
    cfg.layers = ParseLayerSpecs(r.Require("model.layers"));
  }
  cfg.split_point = NonNegative(
      integer("model.split_point", static_cast<std::int64_t>(cfg.layers.size())),
      "model.split_point");
  if (r.Has("model.split_points")) {
    for (auto p : r.GetIntList("model.split_points")) {
      cfg.split_points.push_back(NonNegative(p, "model.split_points"));
    }
  } else {
    cfg.split_points = {cfg.split_point};
    r.Set("model.split_points", std::to_string(cfg.split_point));
  }

  cfg.epochs = static_cast<int>(integer("train.epochs", 20));
  cfg.lr = num("train.lr", 0.05);
  cfg.batch_size = NonNegative(integer("train.batch_size", 32),
                               "train.batch_size");

  if (r.Has("audit.sigmas")) {
    cfg.audit_sigmas = r.GetDoubleList("audit.sigmas");
  } else {
    cfg.audit_sigmas = {num("audit.sigma", 1.0)};
  }
  if (cfg.audit_sigmas.empty()) throw ParameterError("audit.sigmas is empty");
  for (double s : cfg.audit_sigmas) {
    if (!(s > 0.0)) throw ParameterError("audit sigmas must be > 0");
  }
  const std::string sub = str("audit.subsample", "none");
  if (sub != "none") {
    cfg.subsample =
        SubsampleSpec::Parse(sub, DeriveSeed(cfg.seed, kSubsampleStream));
  }
  cfg.audit_samples = NonNegative(integer("audit.samples", 50),
                                  "audit.samples");

  const std::string method = str("attack.method", "mle");
  if (method != "none") {
    AttackConfig a;
    a.method = ParseAttackMethod(method);
    a.steps = static_cast<int>(integer("attack.steps", 300));
    a.lr = num("attack.lr", 0.05);
    a.init = ParseAttackInit(str("attack.init", "aux_mean"));
    a.batch_size = NonNegative(integer("attack.batch_size", 16),
                               "attack.batch_size");
    a.seed = DeriveSeed(cfg.seed, kAttackStream);
    ValidateAttackConfig(a);
    cfg.attack = a;
  }
  cfg.attack_samples = NonNegative(integer("attack.samples", 50),
                                   "attack.samples");

  cfg.defense_scheme = ParseScheme(str("defense.scheme", "fsinfoguard"));
  const std::string granularity = str("defense.granularity", "per_sample");
  if (granularity == "per_sample") {
    cfg.defense_granularity = NoisePlan::Granularity::kPerSample;
  } else if (granularity == "dataset_mean") {
    cfg.defense_granularity = NoisePlan::Granularity::kDatasetMean;
  } else {
    throw ParameterError("defense.granularity must be per_sample or "
                         "dataset_mean");
  }
  cfg.defense_strengths = r.GetDoubleList("defense.strengths");
  cfg.calibration_samples = NonNegative(
      integer("defense.calibration_samples", 32), "defense.calibration_samples");

  for (auto e : r.GetIntList("overfit.epochs")) {
    if (e < 0) throw ParameterError("overfit.epochs must be >= 0");
    cfg.overfit_epochs.push_back(static_cast<int>(e));
  }
  cfg.width_multipliers = r.GetDoubleList("width.multipliers");
  for (double m : cfg.width_multipliers) {
    if (!(m > 0.0)) throw ParameterError("width multipliers must be > 0");
  }
  return cfg;
}

std::string ReferenceConfigText() {
  return R"([run]
seed = 2024
output = runs/reference

[data]
source = synthetic
synthetic = bimodal_digits
n_train = 500
n_aux = 200
n_test = 100

[model]
layers = dense:64, tanh, dense:48, tanh, dense:32, tanh, dense:10
split_point = 2
split_points = 1, 3, 5, 7

[train]
epochs = 20
lr = 0.05
batch_size = 32

[audit]
sigma = 1
samples = 50

[attack]
method = mle
steps = 300
lr = 0.05
init = aux_mean
samples = 50

[defense]
scheme = fsinfoguard
strengths = 0.5, 1, 1.5, 2, 2.5
granularity = per_sample

[overfit]
epochs = 0, 1, 2, 5, 10, 20, 40

[width]
multipliers = 1, 2
)";
}

ExperimentConfig ReferenceConfig() {
  return ParseExperimentConfig(KeyValueConfig::Parse(ReferenceConfigText()));
}

Workspace LoadWorkspace(const ExperimentConfig& cfg) {
  const DataSpec& d = cfg.data;
  const std::size_t total = d.n_train + d.n_aux + d.n_test;
  LabeledDataset all;
  switch (d.source) {
    case DataSpec::Source::kSynthetic:
      all = SynthGenerate(d.synthetic, total, DeriveSeed(cfg.seed, kDataStream));
      break;
    case DataSpec::Source::kIdx:
      all = LoadIdx(d.images_path, d.labels_path);
      break;
    case DataSpec::Source::kCsv:
      all = LoadCsvTabular(d.csv_path, d.label_column, d.onehot_columns);
      break;
  }
  if (d.downsample > 1) all = DownsampleImages(all, d.downsample);
  if (all.size() < total) {
    throw ParameterError("dataset has " + std::to_string(all.size()) +
                         " samples, splits need " + std::to_string(total));
  }
  Workspace ws;
  ws.train = Slice(all, 0, d.n_train);
  ws.aux = Slice(all, d.n_train, d.n_train + d.n_aux);
  ws.test = Slice(all, d.n_train + d.n_aux, total);
  return ws;
}

namespace {

std::vector<LayerSpec> ScaleHiddenWidths(std::vector<LayerSpec> specs,
                                         double multiplier) {
  // Every dense/conv layer except the final output layer is hidden.
  std::size_t last = specs.size();
  for (std::size_t i = specs.size(); i-- > 0;) {
    if (specs[i].kind == LayerKind::kDense ||
        specs[i].kind == LayerKind::kConv2d) {
      last = i;
      break;
    }
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (i == last) continue;
    if (specs[i].kind == LayerKind::kDense ||
        specs[i].kind == LayerKind::kConv2d) {
      specs[i].units = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::lround(specs[i].units * multiplier)));
    }
  }
  return specs;
}

TrainOptions TrainingOptions(const ExperimentConfig& cfg, const Workspace& ws,
                             const std::optional<NoisePlan>& noise) {
  TrainOptions opts;
  opts.epochs = cfg.epochs;
  opts.lr = cfg.lr;
  opts.batch_size = cfg.batch_size;
  opts.seed = DeriveSeed(cfg.seed, kTrainStream);
  if (noise) {
    if (noise->scheme == NoisePlan::Scheme::kFixed) {
      opts.noise_sigma = noise->target;
    } else {
      // One sigma per epoch from the current bottom model.
      auto calibration = Head(ws.train, cfg.calibration_samples);
      NoisePlan plan = *noise;
      opts.sigma_schedule = [calibration, plan](const SplitNet& net, int) {
        return CalibrateDatasetSigma(net, calibration, plan);
      };
    }
  }
  return opts;
}

SplitNet BuildOrLoad(const ExperimentConfig& cfg, const Workspace& ws,
                     const std::vector<LayerSpec>& specs) {
  if (cfg.model_path) {
    SplitNet net = LoadParameters(*cfg.model_path);
    if (net.input_shape() != ws.train.input_shape) {
      throw ShapeError("pretrained model expects input " +
                       ShapeToString(net.input_shape()) + ", data is " +
                       ShapeToString(ws.train.input_shape));
    }
    return net.WithSplitPoint(cfg.split_point);
  }
  return SplitNet::Build(ws.train.input_shape, specs, cfg.split_point,
                         DeriveSeed(cfg.seed, kModelInitStream));
}

SplitNet TrainSpecs(const ExperimentConfig& cfg, const Workspace& ws,
                    const std::vector<LayerSpec>& specs,
                    const std::optional<NoisePlan>& noise,
                    TrainingTrace* trace, const TrainHooks& hooks = {}) {
  SplitNet net = BuildOrLoad(cfg, ws, specs);
  if (cfg.model_path) return net;
  TrainingTrace t = TrainSgd(net, ws.train, &ws.test,
                             TrainingOptions(cfg, ws, noise), hooks);
  if (trace != nullptr) *trace = std::move(t);
  return net;
}

struct AttackSummary {
  double mse = 0.0;
  std::optional<double> ssim;
  std::vector<Tensor> previews;
};

AttackSummary AttackSplit(const ExperimentConfig& cfg, const Workspace& ws,
                          const SplitNet& net,
                          const NoiseChannel* channel = nullptr) {
  const auto targets = Head(ws.test, cfg.attack_samples);
  std::vector<Tensor> smashed;
  smashed.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    smashed.push_back(channel != nullptr
                          ? channel->Apply(targets[i],
                                           DeriveSeed(cfg.seed ^ kDefenseNoiseStream, i))
                          : ForwardBottom(net, targets[i]));
  }
  const auto aux = ws.aux.empty() ? Head(ws.train, ws.train.size())
                                  : ws.aux.inputs;
  const AttackResult result = RunAttack(net, targets, smashed, *cfg.attack, aux);
  AttackSummary out;
  out.mse = result.MeanMse();
  out.ssim = result.MeanSsim();
  for (std::size_t i = 0; i < std::min<std::size_t>(4, targets.size()); ++i) {
    out.previews.push_back(result.reconstructions[i]);
  }
  return out;
}

bool Previewable(const Shape& s) {
  return s.size() == 2 || (s.size() == 3 && (s[0] == 1 || s[0] == 3));
}

void AddPreviews(SweepReport& report, const std::string& prefix,
                 const std::vector<Tensor>& recon) {
  for (std::size_t i = 0; i < recon.size(); ++i) {
    if (!Previewable(recon[i].shape())) return;
    report.previews.emplace_back(prefix + "_s" + std::to_string(i), recon[i]);
  }
}

std::size_t FirstHiddenWidth(const std::vector<LayerSpec>& specs) {
  for (const auto& s : specs) {
    if (s.kind == LayerKind::kDense || s.kind == LayerKind::kConv2d) {
      return s.units;
    }
  }
  return 0;
}

// Accuracy with per-sample channel noise on the smashed data.
double NoisyAccuracy(const SplitNet& net, const LabeledDataset& test,
                     const NoiseChannel& channel, std::uint64_t seed) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Tensor logits =
        ForwardTop(net, channel.Apply(test.inputs[i], DeriveSeed(seed, i)));
    const auto v = logits.values();
    if (std::max_element(v.begin(), v.end()) - v.begin() == test.labels[i]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

SplitNet TrainModel(const ExperimentConfig& cfg, const Workspace& ws,
                    const std::optional<NoisePlan>& noise,
                    TrainingTrace* trace) {
  return TrainSpecs(cfg, ws, cfg.layers, noise, trace);
}

NoisePlan PlanForStrength(NoisePlan::Scheme scheme, double strength,
                          NoisePlan::Granularity granularity) {
  NoisePlan plan;
  plan.scheme = scheme;
  plan.granularity = granularity;
  switch (scheme) {
    case NoisePlan::Scheme::kFsinfoGuard:
      plan.target = -strength;
      break;
    case NoisePlan::Scheme::kDfil:
      if (!(strength > 0.0)) {
        throw ParameterError("dFIL strength (1/dFIL) must be > 0");
      }
      plan.target = 1.0 / strength;
      break;
    case NoisePlan::Scheme::kFixed:
      plan.target = strength;
      break;
  }
  ValidateNoisePlan(plan);
  return plan;
}

SweepReport RunAuditSweep(const ExperimentConfig& cfg) {
  SweepReport report;
  const Workspace ws = LoadWorkspace(cfg);
  const SplitNet trained = TrainModel(cfg, ws);
  const double accuracy = Evaluate(trained, ws.test).accuracy;
  const auto audit_inputs = Head(ws.test, cfg.audit_samples);
  for (std::size_t p : cfg.split_points) {
    std::optional<AttackSummary> attack;
    std::string attack_error;
    std::optional<SplitNet> net;
    try {
      net = trained.WithSplitPoint(p);
      if (cfg.attack) attack = AttackSplit(cfg, ws, *net);
    } catch (const std::exception& e) {
      attack_error = e.what();
    }
    if (attack) {
      AddPreviews(report, "audit_sp" + std::to_string(p), attack->previews);
    }
    for (double sigma : cfg.audit_sigmas) {
      SweepRow row;
      row.experiment = "audit";
      row.split_point = p;
      row.sigma = sigma;
      row.task_accuracy = accuracy;
      row.error = attack_error;
      if (attack) {
        row.attack_mse = attack->mse;
        row.attack_ssim = attack->ssim;
      }
      if (net) {
        try {
          row.fsinfo_mean =
              FsinfoDataset(*net, audit_inputs, sigma, cfg.subsample)
                  .mean_fsinfo;
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

SweepReport RunWidthStudy(const ExperimentConfig& cfg) {
  if (cfg.width_multipliers.empty()) {
    throw ParameterError("width study needs width.multipliers");
  }
  if (cfg.model_path) {
    throw ParameterError("width study trains each width; unset model.params");
  }
  SweepReport report;
  const Workspace ws = LoadWorkspace(cfg);
  const auto audit_inputs = Head(ws.test, cfg.audit_samples);
  for (double m : cfg.width_multipliers) {
    SweepRow row;
    row.experiment = "width";
    row.split_point = cfg.split_point;
    row.sigma = cfg.audit_sigmas.front();
    const auto specs = ScaleHiddenWidths(cfg.layers, m);
    row.width = FirstHiddenWidth(specs);
    try {
      const SplitNet net = TrainSpecs(cfg, ws, specs, std::nullopt, nullptr);
      row.task_accuracy = Evaluate(net, ws.test).accuracy;
      row.fsinfo_mean =
          FsinfoDataset(net, audit_inputs, *row.sigma, cfg.subsample)
              .mean_fsinfo;
      if (cfg.attack) {
        const auto attack = AttackSplit(cfg, ws, net);
        row.attack_mse = attack.mse;
        row.attack_ssim = attack.ssim;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

SweepReport RunDefenseSweep(const ExperimentConfig& cfg) {
  if (cfg.defense_strengths.empty()) {
    throw ParameterError("defense sweep needs defense.strengths");
  }
  SweepReport report;
  const Workspace ws = LoadWorkspace(cfg);
  const auto audit_inputs = Head(ws.test, cfg.audit_samples);
  const auto calibration = Head(ws.train, cfg.calibration_samples);
  const double undefended_sigma = cfg.audit_sigmas.front();
  for (double strength : cfg.defense_strengths) {
    SweepRow row;
    row.experiment = "defense";
    row.split_point = cfg.split_point;
    row.defense_scheme = SchemeName(cfg.defense_scheme);
    row.defense_strength = strength;
    try {
      const NoisePlan plan =
          PlanForStrength(cfg.defense_scheme, strength, cfg.defense_granularity);
      const bool noiseless =
          plan.scheme == NoisePlan::Scheme::kFixed && plan.target == 0.0;
      const SplitNet net = TrainModel(
          cfg, ws, noiseless ? std::nullopt : std::optional<NoisePlan>(plan));
      const NoiseChannel channel(net, plan, calibration);
      std::vector<double> sigmas;
      for (const Tensor& x : audit_inputs) {
        const double s = channel.SigmaFor(x);
        sigmas.push_back(s > 0.0 ? s : undefended_sigma);
      }
      const LeakageReport leak =
          FsinfoDatasetPerSample(net, audit_inputs, sigmas, cfg.subsample);
      row.fsinfo_mean = leak.mean_fsinfo;
      row.sigma = leak.sigma;
      if (noiseless) {
        row.task_accuracy = Evaluate(net, ws.test).accuracy;
      } else {
        row.task_accuracy = NoisyAccuracy(
            net, ws.test, channel, DeriveSeed(cfg.seed, kDefenseNoiseStream));
      }
      if (cfg.attack) {
        const auto attack =
            AttackSplit(cfg, ws, net, noiseless ? nullptr : &channel);
        row.attack_mse = attack.mse;
        row.attack_ssim = attack.ssim;
        AddPreviews(report,
                    "defense_" + *row.defense_scheme + "_" +
                        FormatNumber(strength),
                    attack.previews);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

SweepReport RunOverfittingStudy(const ExperimentConfig& cfg) {
  std::vector<int> schedule = cfg.overfit_epochs;
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()),
                 schedule.end());
  if (schedule.empty() || schedule.front() != 0) {
    throw ParameterError("overfit.epochs must include 0 (the untrained model)");
  }
  if (cfg.model_path) {
    throw ParameterError("overfitting study trains from scratch; unset "
                         "model.params");
  }
  SweepReport report;
  const Workspace ws = LoadWorkspace(cfg);
  const auto audit_inputs = Head(ws.test, cfg.audit_samples);
  const double sigma = cfg.audit_sigmas.front();

  auto checkpoint = [&](const SplitNet& net, int epoch,
                        std::optional<double> test_accuracy) {
    SweepRow row;
    row.experiment = "overfit";
    row.split_point = cfg.split_point;
    row.epoch = epoch;
    row.sigma = sigma;
    try {
      row.task_accuracy =
          test_accuracy ? *test_accuracy : Evaluate(net, ws.test).accuracy;
      row.fsinfo_mean =
          FsinfoDataset(net, audit_inputs, sigma, cfg.subsample).mean_fsinfo;
      if (cfg.attack) {
        const auto attack = AttackSplit(cfg, ws, net);
        row.attack_mse = attack.mse;
        row.attack_ssim = attack.ssim;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  };

  SplitNet net = BuildOrLoad(cfg, ws, cfg.layers);
  checkpoint(net, 0, std::nullopt);
  if (schedule.size() == 1) return report;

  ExperimentConfig train_cfg = cfg;
  train_cfg.epochs = schedule.back();
  std::size_t next = 1;
  TrainHooks hooks;
  hooks.on_epoch_end = [&](const SplitNet& current, const EpochStats& stats) {
    if (next < schedule.size() && stats.epoch == schedule[next]) {
      checkpoint(current, stats.epoch, stats.test_accuracy);
      ++next;
    }
  };
  try {
    TrainSgd(net, ws.train, &ws.test,
             TrainingOptions(train_cfg, ws, std::nullopt), hooks);
  } catch (const TrainingError& e) {
    for (; next < schedule.size(); ++next) {
      SweepRow row;
      row.experiment = "overfit";
      row.split_point = cfg.split_point;
      row.epoch = schedule[next];
      row.sigma = sigma;
      row.error = e.what();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

bool SweepReport::AnyFailed() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const SweepRow& r) { return !r.ok(); });
}

namespace {

const char* const kColumns[] = {
    "experiment",     "split_point", "width",       "epoch",
    "defense_scheme", "defense_strength", "sigma",  "fsinfo_mean",
    "attack_mse",     "attack_ssim", "task_accuracy", "status",
    "error"};

template <typename T>
std::string Cell(const std::optional<T>& v, const std::string& null) {
  if (!v) return null;
  if constexpr (std::is_same_v<T, std::string>) {
    return *v;
  } else {
    return FormatNumber(static_cast<double>(*v));
  }
}

std::vector<std::string> RowCells(const SweepRow& r, const std::string& null) {
  return {r.experiment,
          Cell(r.split_point, null),
          Cell(r.width, null),
          Cell(r.epoch, null),
          Cell(r.defense_scheme, null),
          Cell(r.defense_strength, null),
          Cell(r.sigma, null),
          Cell(r.fsinfo_mean, null),
          Cell(r.attack_mse, null),
          Cell(r.attack_ssim, null),
          Cell(r.task_accuracy, null),
          r.ok() ? "ok" : "failed",
          r.error};
}

std::string CsvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> ParseCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::optional<double> OptNumber(const std::string& s, std::size_t row,
                                std::size_t col) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("report: bad number '" + s + "'", row, col);
  }
}

}  // namespace

std::string SweepReport::ToCsv() const {
  std::string out;
  for (std::size_t i = 0; i < std::size(kColumns); ++i) {
    if (i > 0) out += ',';
    out += kColumns[i];
  }
  out += '\n';
  for (const SweepRow& r : rows) {
    const auto cells = RowCells(r, "");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += CsvEscape(cells[i]);
    }
    out += '\n';
  }
  return out;
}

std::string SweepReport::ToGnuplot() const {
  std::string out = "#";
  // The error message is free text; gnuplot files stop at status.
  constexpr std::size_t kNumeric = std::size(kColumns) - 1;
  for (std::size_t i = 0; i < kNumeric; ++i) {
    out += ' ';
    out += kColumns[i];
  }
  out += '\n';
  for (const SweepRow& r : rows) {
    auto cells = RowCells(r, "NaN");
    if (cells[4].empty()) cells[4] = "-";
    for (std::size_t i = 0; i < kNumeric; ++i) {
      if (i > 0) out += ' ';
      out += cells[i];
    }
    out += '\n';
  }
  return out;
}

SweepReport SweepReport::FromCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("report: empty file", 1);
  const auto header = ParseCsvLine(line);
  if (header.size() != std::size(kColumns)) {
    throw FormatError("report: unexpected header", 1);
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != kColumns[i]) {
      throw FormatError("report: unexpected column '" + header[i] + "'", 1,
                        i + 1);
    }
  }
  SweepReport report;
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty()) continue;
    const auto c = ParseCsvLine(line);
    if (c.size() != header.size()) {
      throw FormatError("report: wrong number of fields", row_number);
    }
    SweepRow r;
    r.experiment = c[0];
    auto as_size = [](std::optional<double> v) -> std::optional<std::size_t> {
      if (!v) return std::nullopt;
      return static_cast<std::size_t>(*v);
    };
    r.split_point = as_size(OptNumber(c[1], row_number, 2));
    r.width = as_size(OptNumber(c[2], row_number, 3));
    if (auto e = OptNumber(c[3], row_number, 4)) r.epoch = static_cast<int>(*e);
    if (!c[4].empty()) r.defense_scheme = c[4];
    r.defense_strength = OptNumber(c[5], row_number, 6);
    r.sigma = OptNumber(c[6], row_number, 7);
    r.fsinfo_mean = OptNumber(c[7], row_number, 8);
    r.attack_mse = OptNumber(c[8], row_number, 9);
    r.attack_ssim = OptNumber(c[9], row_number, 10);
    r.task_accuracy = OptNumber(c[10], row_number, 11);
    r.error = c[12];
    if (c[11] == "failed" && r.error.empty()) r.error = "failed";
    report.rows.push_back(std::move(r));
  }
  return report;
}

std::string RunMeta(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "; fsinfo " << kVersion << '\n';
  out << "; compiler " << __VERSION__ << '\n';
  out << "; eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
      << EIGEN_MINOR_VERSION << '\n';
  out << cfg.resolved.ToString();
  return out.str();
}

void WriteRunDirectory(const std::string& dir, const SweepReport& report,
                       const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (fs::exists(root) && !fs::is_empty(root)) {
    throw ParameterError("output directory " + dir +
                         " is not empty; runs always go to a fresh directory");
  }
  fs::create_directories(root);
  auto write = [&](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write " + path.string());
    out << text;
  };
  write(root / "report.csv", report.ToCsv());
  write(root / "report.dat", report.ToGnuplot());
  write(root / "run.meta", RunMeta(cfg));
  if (!report.previews.empty()) {
    fs::create_directories(root / "recon");
    for (const auto& [name, image] : report.previews) {
      const bool rgb = image.shape().size() == 3 && image.shape()[0] == 3;
      WriteImagePreview((root / "recon" / (name + (rgb ? ".ppm" : ".pgm")))
                            .string(),
                        image);
      WriteFloat64((root / "recon" / (name + ".f64")).string(), {image});
    }
  }
}

}  // namespace fsinfo
