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

#include "fsinfo/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fsinfo/errors.h"
#include "fsinfo/rng.h"

namespace fsinfo {
namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kEvalNoiseStream = 3;

// Gradient of the per-sample loss w.r.t. the network output.
using LossGrad = double (*)(const Tensor& out, const Tensor& target,
                            int label, std::vector<double>& grad);

double CrossEntropyGrad(const Tensor& logits, const Tensor&, int label,
                        std::vector<double>& grad) {
  const auto v = logits.values();
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  const double lse = m + std::log(sum);
  grad.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) grad[i] = std::exp(v[i] - lse);
  grad[label] -= 1.0;
  return lse - v[label];
}

double SquaredErrorGrad(const Tensor& out, const Tensor& target, int,
                        std::vector<double>& grad) {
  const auto y = out.values();
  const auto t = target.values();
  const double inv_dim = 1.0 / static_cast<double>(y.size());
  grad.resize(y.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - t[i];
    loss += d * d;
    grad[i] = 2.0 * d * inv_dim;
  }
  return loss * inv_dim;
}

void AddNoise(Tensor& z, double sigma, std::mt19937_64& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : z.values()) v += normal(rng);
}

// Forward + backward for one sample. Accumulates parameter gradients into
// `grads` and returns the loss. Noise (if any) is added to the smashed data.
double SampleGradients(const SplitNet& net, const Tensor& x,
                       const Tensor& target, int label, LossGrad loss_grad,
                       double sigma, std::mt19937_64* noise_rng,
                       std::vector<LayerGrads>& grads) {
  auto bottom_acts = ForwardTrace(net.bottom(), x, 0);
  if (noise_rng != nullptr) AddNoise(bottom_acts.back(), sigma, *noise_rng);
  auto top_acts = ForwardTrace(net.top(), bottom_acts.back(),
                               net.split_point());
  std::vector<double> g;
  const double loss = loss_grad(top_acts.back(), target, label, g);

  const auto layers = net.layers();
  std::vector<double> scratch;
  auto step = [&](std::size_t index, const Tensor& in, const Tensor& out) {
    scratch.assign(layers[index].in_size(), 0.0);
    LayerBackward(layers[index], in.values(), out.values(), g, scratch,
                  &grads[index]);
    std::swap(g, scratch);
  };
  const std::size_t p = net.split_point();
  for (std::size_t l = layers.size(); l-- > p;) {
    step(l, top_acts[l - p], top_acts[l - p + 1]);
  }
  for (std::size_t l = p; l-- > 0;) {
    step(l, bottom_acts[l], bottom_acts[l + 1]);
  }
  return loss;
}

std::vector<LayerGrads> ZeroAll(const SplitNet& net) {
  std::vector<LayerGrads> grads;
  for (const Layer& l : net.layers()) grads.push_back(ZeroGrads(l));
  return grads;
}

void ApplyUpdate(SplitNet& net, std::vector<LayerGrads>& grads, double scale) {
  auto& layers = net.mutable_layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].weight.size(); ++i) {
      layers[l].weight[i] -= scale * grads[l].weight[i];
      grads[l].weight[i] = 0.0;
    }
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
      layers[l].bias[i] -= scale * grads[l].bias[i];
      grads[l].bias[i] = 0.0;
    }
  }
}

void CheckOptions(const TrainOptions& opts) {
  if (!(opts.lr >= 0.0) || !std::isfinite(opts.lr)) {
    throw ParameterError("learning rate must be finite and >= 0");
  }
  if (opts.epochs < 0) throw ParameterError("epochs must be >= 0");
  if (opts.batch_size == 0) throw ParameterError("batch size must be > 0");
  if (opts.noise_sigma && !(*opts.noise_sigma >= 0.0)) {
    throw ParameterError("noise sigma must be >= 0");
  }
}

// One epoch of SGD over `n` samples. Returns the mean batch loss.
template <typename SampleFn>
double RunEpoch(SplitNet& net, std::size_t n, const TrainOptions& opts,
                std::mt19937_64& shuffle_rng, int epoch, SampleFn&& sample) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  auto grads = ZeroAll(net);
  double total = 0.0;
  for (std::size_t start = 0; start < n; start += opts.batch_size) {
    const std::size_t end = std::min(n, start + opts.batch_size);
    for (std::size_t i = start; i < end; ++i) {
      double loss = 0.0;
      try {
        loss = sample(order[i], grads);
      } catch (const NumericError& e) {
        throw TrainingError(std::string("training diverged: ") + e.what(),
                            epoch);
      }
      if (!std::isfinite(loss)) {
        throw TrainingError("training loss is not finite", epoch);
      }
      total += loss;
    }
    ApplyUpdate(net, grads, opts.lr / static_cast<double>(end - start));
  }
  return total / static_cast<double>(n);
}

}  // namespace

double CrossEntropy(const Tensor& logits, int label) {
  std::vector<double> unused;
  return CrossEntropyGrad(logits, logits, label, unused);
}

std::vector<LayerGrads> CrossEntropyGradients(const SplitNet& net,
                                              const Tensor& x, int label,
                                              double* loss) {
  auto grads = ZeroAll(net);
  const double l = SampleGradients(net, x, x, label, &CrossEntropyGrad, 0.0,
                                   nullptr, grads);
  if (loss != nullptr) *loss = l;
  return grads;
}

EvalResult Evaluate(const SplitNet& net, const LabeledDataset& data,
                    double noise_sigma, std::uint64_t seed) {
  if (data.empty()) throw ParameterError("cannot evaluate on an empty set");
  std::mt19937_64 rng(seed);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Tensor z = ForwardBottom(net, data.inputs[i]);
    AddNoise(z, noise_sigma, rng);
    const Tensor logits = ForwardTop(net, z);
    loss += CrossEntropy(logits, data.labels[i]);
    const auto v = logits.values();
    const auto best = std::max_element(v.begin(), v.end()) - v.begin();
    if (best == data.labels[i]) ++correct;
  }
  const double n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(correct) / n};
}

TrainingTrace TrainSgd(SplitNet& net, const LabeledDataset& train,
                       const LabeledDataset* test, const TrainOptions& opts,
                       const TrainHooks& hooks) {
  CheckOptions(opts);
  ValidateDataset(train);
  if (train.empty()) throw ParameterError("training set is empty");
  const std::size_t n_out = NumElements(net.output_shape());
  for (int label : train.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_out) {
      throw ParameterError("label " + std::to_string(label) +
                           " is not a valid class index for " +
                           std::to_string(n_out) + " outputs");
    }
  }
  std::mt19937_64 shuffle_rng(DeriveSeed(opts.seed, kShuffleStream));
  std::mt19937_64 noise_rng(DeriveSeed(opts.seed, kNoiseStream));
  const std::uint64_t eval_seed = DeriveSeed(opts.seed, kEvalNoiseStream);

  TrainingTrace trace;
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    double sigma = opts.noise_sigma.value_or(0.0);
    if (opts.sigma_schedule) sigma = opts.sigma_schedule(net, epoch);
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw TrainingError("noise schedule returned an invalid sigma", epoch);
    }
    std::mt19937_64* rng = sigma > 0.0 ? &noise_rng : nullptr;
    RunEpoch(net, train.size(), opts, shuffle_rng, epoch,
             [&](std::size_t i, std::vector<LayerGrads>& grads) {
               return SampleGradients(net, train.inputs[i], train.inputs[i],
                                      train.labels[i], &CrossEntropyGrad,
                                      sigma, rng, grads);
             });
    EpochStats stats;
    stats.epoch = epoch;
    stats.sigma = sigma;
    try {
      const EvalResult tr = Evaluate(net, train, sigma, eval_seed);
      stats.train_loss = tr.loss;
      stats.train_accuracy = tr.accuracy;
      stats.test_loss = std::numeric_limits<double>::quiet_NaN();
      stats.test_accuracy = std::numeric_limits<double>::quiet_NaN();
      if (test != nullptr && !test->empty()) {
        const EvalResult te = Evaluate(net, *test, sigma, eval_seed);
        stats.test_loss = te.loss;
        stats.test_accuracy = te.accuracy;
      }
    } catch (const NumericError& e) {
      throw TrainingError(std::string("training diverged: ") + e.what(),
                          epoch);
    }
    if (!std::isfinite(stats.train_loss)) {
      throw TrainingError("training loss is not finite", epoch);
    }
    trace.epochs.push_back(stats);
    if (hooks.on_epoch_end) hooks.on_epoch_end(net, stats);
  }
  return trace;
}

std::vector<double> TrainRegression(SplitNet& net,
                                    const std::vector<Tensor>& inputs,
                                    const std::vector<Tensor>& targets,
                                    const TrainOptions& opts) {
  CheckOptions(opts);
  if (inputs.empty()) throw ParameterError("regression set is empty");
  if (inputs.size() != targets.size()) {
    throw ParameterError("inputs and targets differ in length");
  }
  const std::size_t n_out = NumElements(net.output_shape());
  for (const Tensor& t : targets) {
    if (t.size() != n_out) {
      throw ShapeError("target size " + std::to_string(t.size()) +
                       " does not match network output " +
                       std::to_string(n_out));
    }
  }
  std::mt19937_64 shuffle_rng(DeriveSeed(opts.seed, kShuffleStream));
  std::mt19937_64 noise_rng(DeriveSeed(opts.seed, kNoiseStream));
  const double sigma = opts.noise_sigma.value_or(0.0);
  std::mt19937_64* rng = sigma > 0.0 ? &noise_rng : nullptr;
  std::vector<double> losses;
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    losses.push_back(RunEpoch(
        net, inputs.size(), opts, shuffle_rng, epoch,
        [&](std::size_t i, std::vector<LayerGrads>& grads) {
          return SampleGradients(net, inputs[i], targets[i], 0,
                                 &SquaredErrorGrad, sigma, rng, grads);
        }));
  }
  return losses;
}

}  // namespace fsinfo
