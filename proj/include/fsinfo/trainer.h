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

#ifndef FSINFO_TRAINER_H_
#define FSINFO_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fsinfo/dataset.h"
#include "fsinfo/split_net.h"

namespace fsinfo {

struct TrainOptions {
  int epochs = 20;
  double lr = 0.05;
  std::size_t batch_size = 32;
  // Std-dev of Gaussian noise added to the smashed data on every training
  // forward pass (and on evaluation passes reported in the trace).
  std::optional<double> noise_sigma;
  // When set, overrides noise_sigma at the start of every epoch; called with
  // the current parameters so the noise can track the bottom model.
  std::function<double(const SplitNet&, int epoch)> sigma_schedule;
  std::uint64_t seed = 0;
};

struct EpochStats;

struct TrainHooks {
  // Called after every epoch with the updated parameters.
  std::function<void(const SplitNet&, const EpochStats&)> on_epoch_end;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double sigma = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_loss = 0.0;  // NaN without a test set
  double test_accuracy = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct TrainingTrace {
  std::vector<EpochStats> epochs;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Mean cross-entropy and accuracy; noise (when sigma > 0) drawn from `seed`.
EvalResult Evaluate(const SplitNet& net, const LabeledDataset& data,
                    double noise_sigma = 0.0, std::uint64_t seed = 0);

// Mini-batch SGD on mean softmax cross-entropy of the full network.
// Deterministic given options.seed. Throws TrainingError on divergence.
TrainingTrace TrainSgd(SplitNet& net, const LabeledDataset& train,
                       const LabeledDataset* test, const TrainOptions& opts,
                       const TrainHooks& hooks = {});

// Mini-batch SGD on mean squared error ||net(x) - target||^2 / dim.
// Returns the training loss after each epoch.
std::vector<double> TrainRegression(SplitNet& net,
                                    const std::vector<Tensor>& inputs,
                                    const std::vector<Tensor>& targets,
                                    const TrainOptions& opts);

// Parameter gradients of the per-sample loss, layer by layer. Exposed for
// gradient checks.
std::vector<LayerGrads> CrossEntropyGradients(const SplitNet& net,
                                              const Tensor& x, int label,
                                              double* loss = nullptr);

double CrossEntropy(const Tensor& logits, int label);

}  // namespace fsinfo

#endif  // FSINFO_TRAINER_H_
