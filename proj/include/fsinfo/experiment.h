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

#ifndef FSINFO_EXPERIMENT_H_
#define FSINFO_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsinfo/attack.h"
#include "fsinfo/config.h"
#include "fsinfo/data_io.h"
#include "fsinfo/defense.h"
#include "fsinfo/fisher_metric.h"
#include "fsinfo/model_io.h"
#include "fsinfo/trainer.h"

namespace fsinfo {

struct DataSpec {
  enum class Source { kSynthetic, kIdx, kCsv };
  Source source = Source::kSynthetic;
  SynthKind synthetic = SynthKind::kBimodalDigits;
  std::string images_path, labels_path;  // idx
  std::string csv_path, label_column;    // csv
  std::vector<std::string> onehot_columns;
  std::size_t downsample = 1;
  // Explicit consecutive splits: train, then adversary auxiliary, then test.
  std::size_t n_train = 500;
  std::size_t n_aux = 200;
  std::size_t n_test = 100;
};

struct ExperimentConfig {
  KeyValueConfig resolved;  // every key after defaults and overrides
  std::uint64_t seed = 0;
  std::string output_dir;

  DataSpec data;
  std::vector<LayerSpec> layers;
  std::size_t split_point = 1;
  std::vector<std::size_t> split_points;
  std::optional<std::string> model_path;  // pretrained parameters

  int epochs = 20;
  double lr = 0.05;
  std::size_t batch_size = 32;

  std::vector<double> audit_sigmas{1.0};
  std::optional<SubsampleSpec> subsample;
  std::size_t audit_samples = 50;

  std::optional<AttackConfig> attack;
  std::size_t attack_samples = 50;

  NoisePlan::Scheme defense_scheme = NoisePlan::Scheme::kFsinfoGuard;
  NoisePlan::Granularity defense_granularity =
      NoisePlan::Granularity::kPerSample;
  std::vector<double> defense_strengths;
  std::size_t calibration_samples = 32;

  std::vector<int> overfit_epochs;
  std::vector<double> width_multipliers;
};

ExperimentConfig ParseExperimentConfig(const KeyValueConfig& config);

// The desk-scale configuration the trend checks run on (8x8 bimodal digits,
// 4-block MLP).
std::string ReferenceConfigText();
ExperimentConfig ReferenceConfig();

struct Workspace {
  LabeledDataset train;
  LabeledDataset aux;
  LabeledDataset test;
};

Workspace LoadWorkspace(const ExperimentConfig& cfg);

// Builds from cfg (input shape from the data) and trains with cfg's SGD
// settings. `noise` optionally adds training-time smashed-data noise.
SplitNet TrainModel(const ExperimentConfig& cfg, const Workspace& ws,
                    const std::optional<NoisePlan>& noise = std::nullopt,
                    TrainingTrace* trace = nullptr);

// One configuration's results. Null fields were not computed.
struct SweepRow {
  std::string experiment;
  std::optional<std::size_t> split_point;
  std::optional<std::size_t> width;
  std::optional<int> epoch;
  std::optional<std::string> defense_scheme;
  std::optional<double> defense_strength;
  std::optional<double> sigma;
  std::optional<double> fsinfo_mean;
  std::optional<double> attack_mse;
  std::optional<double> attack_ssim;
  std::optional<double> task_accuracy;
  std::string error;  // empty when the row succeeded

  bool ok() const { return error.empty(); }
};

struct SweepReport {
  std::vector<SweepRow> rows;
  // Reconstruction previews, written as recon/<name>.pgm.
  std::vector<std::pair<std::string, Tensor>> previews;

  bool AnyFailed() const;
  std::string ToCsv() const;
  // Whitespace-separated columns, "NaN" for nulls, '#' header.
  std::string ToGnuplot() const;
  static SweepReport FromCsv(const std::string& text);
};

SweepReport RunAuditSweep(const ExperimentConfig& cfg);
SweepReport RunWidthStudy(const ExperimentConfig& cfg);
SweepReport RunDefenseSweep(const ExperimentConfig& cfg);
SweepReport RunOverfittingStudy(const ExperimentConfig& cfg);

// Defense strength -> noise plan: FSInfoGuard target = -strength,
// dFIL target = 1/strength, fixed sigma = strength.
NoisePlan PlanForStrength(NoisePlan::Scheme scheme, double strength,
                          NoisePlan::Granularity granularity);

// Creates `dir` (which must not exist or be empty) and writes report.csv,
// report.dat, run.meta and recon/*.pgm.
void WriteRunDirectory(const std::string& dir, const SweepReport& report,
                       const ExperimentConfig& cfg);

// Resolved config plus build information.
std::string RunMeta(const ExperimentConfig& cfg);

}  // namespace fsinfo

#endif  // FSINFO_EXPERIMENT_H_
