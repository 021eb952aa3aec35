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

#ifndef FSINFO_ATTACK_H_
#define FSINFO_ATTACK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsinfo/layer.h"
#include "fsinfo/split_net.h"
#include "fsinfo/tensor.h"

namespace fsinfo {

struct AttackConfig {
  enum class Method { kMle, kInverseNet };
  enum class Init { kZeros, kGaussian, kAuxMean };

  Method method = Method::kMle;
  int steps = 500;   // MLE: gradient steps; inverse net: training epochs
  double lr = 0.05;  // step size for either method
  Init init = Init::kAuxMean;
  std::uint64_t seed = 0;
  std::size_t batch_size = 16;  // inverse-net training
};

void ValidateAttackConfig(const AttackConfig& cfg);
std::string AttackMethodName(AttackConfig::Method method);
AttackConfig::Method ParseAttackMethod(const std::string& name);
AttackConfig::Init ParseAttackInit(const std::string& name);

struct MleResult {
  Tensor reconstruction;  // best iterate
  double objective = 0.0;  // ||f(xhat) - z||^2 at the best iterate
  std::vector<double> objective_trace;  // one entry per iterate, incl. init
};

// Gradient descent on ||f_bottom(xhat) - z||^2 over xhat. `aux_mean` is
// required for Init::kAuxMean.
MleResult MleInvert(const SplitNet& net, const Tensor& z,
                    const AttackConfig& cfg, const Tensor* aux_mean = nullptr);

// Mirror-of-bottom MLP decoder: dense layers back through the bottom's
// dense widths to d_x, relu between, tanh on the output.
std::vector<LayerSpec> MirrorDecoderSpecs(const SplitNet& net);

// Fits g(z) ~ x on the auxiliary set with SGD on mean squared error.
// The returned network has input shape = smashed shape and no top part.
SplitNet TrainInverseNet(const SplitNet& net, const std::vector<Tensor>& aux,
                         const std::vector<LayerSpec>& decoder_arch,
                         int epochs, std::uint64_t seed, double lr = 0.05,
                         std::size_t batch_size = 16);

// Decoder output reshaped to `input_shape`.
Tensor InvertWithDecoder(const SplitNet& decoder, const Tensor& z,
                         const Shape& input_shape);

double ReconstructionMse(const Tensor& x, const Tensor& xhat);

// Global-statistics SSIM on images in [-1, 1] (L = 2), channels averaged.
// Accepts [H, W] or [C, H, W].
double ReconstructionSsim(const Tensor& x, const Tensor& xhat);

struct AttackResult {
  std::vector<Tensor> reconstructions;
  std::vector<double> per_sample_mse;
  std::optional<std::vector<double>> per_sample_ssim;  // images only
  AttackConfig config;

  double MeanMse() const;
  std::optional<double> MeanSsim() const;
};

// Reconstructs each targets[i] from smashed[i]. The auxiliary set supplies
// the MLE prior mean and the inverse-net training data.
AttackResult RunAttack(const SplitNet& net, const std::vector<Tensor>& targets,
                       const std::vector<Tensor>& smashed,
                       const AttackConfig& cfg,
                       const std::vector<Tensor>& aux);

// 8-bit preview mapping [-1, 1] to [0, 255]: PGM for [H,W] / [1,H,W],
// PPM for [3,H,W].
void WriteImagePreview(const std::string& path, const Tensor& image);

}  // namespace fsinfo

#endif  // FSINFO_ATTACK_H_
