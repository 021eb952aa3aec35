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

#include "fsinfo/attack.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "fsinfo/errors.h"
#include "fsinfo/rng.h"
#include "fsinfo/trainer.h"

namespace fsinfo {
namespace {

void CheckSameShape(const Tensor& x, const Tensor& xhat) {
  if (x.size() != xhat.size() || x.size() == 0) {
    throw ShapeError("reconstruction shape " + ShapeToString(xhat.shape()) +
                     " does not match " + ShapeToString(x.shape()));
  }
}

Tensor MeanOf(const std::vector<Tensor>& batch) {
  Tensor mean(batch.front().shape());
  for (const Tensor& t : batch) {
    for (std::size_t i = 0; i < t.size(); ++i) mean[i] += t[i];
  }
  for (double& v : mean.values()) v /= static_cast<double>(batch.size());
  return mean;
}

double SquaredDistance(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

void ValidateAttackConfig(const AttackConfig& cfg) {
  if (cfg.steps < 1) throw ParameterError("attack steps must be >= 1");
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) {
    throw ParameterError("attack lr must be finite and > 0");
  }
  if (cfg.batch_size == 0) throw ParameterError("attack batch size must be > 0");
}

std::string AttackMethodName(AttackConfig::Method method) {
  return method == AttackConfig::Method::kMle ? "mle" : "inverse_net";
}

AttackConfig::Method ParseAttackMethod(const std::string& name) {
  if (name == "mle") return AttackConfig::Method::kMle;
  if (name == "inverse_net") return AttackConfig::Method::kInverseNet;
  throw ParameterError("unknown attack method '" + name + "'");
}

AttackConfig::Init ParseAttackInit(const std::string& name) {
  if (name == "zeros") return AttackConfig::Init::kZeros;
  if (name == "gaussian") return AttackConfig::Init::kGaussian;
  if (name == "aux_mean") return AttackConfig::Init::kAuxMean;
  throw ParameterError("unknown attack init '" + name + "'");
}

MleResult MleInvert(const SplitNet& net, const Tensor& z,
                    const AttackConfig& cfg, const Tensor* aux_mean) {
  ValidateAttackConfig(cfg);
  if (z.size() != NumElements(net.smashed_shape())) {
    throw ShapeError("smashed data has " + std::to_string(z.size()) +
                     " values, bottom model emits " +
                     std::to_string(NumElements(net.smashed_shape())));
  }
  Tensor xhat(net.input_shape());
  switch (cfg.init) {
    case AttackConfig::Init::kZeros:
      break;
    case AttackConfig::Init::kGaussian: {
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> normal(0.0, 0.5);
      for (double& v : xhat.values()) v = normal(rng);
      break;
    }
    case AttackConfig::Init::kAuxMean:
      if (aux_mean == nullptr || aux_mean->size() != xhat.size()) {
        throw ParameterError("aux_mean init needs an auxiliary-set mean");
      }
      std::copy(aux_mean->values().begin(), aux_mean->values().end(),
                xhat.values().begin());
      break;
  }

  MleResult result;
  Tensor residual(net.smashed_shape());
  auto objective = [&](const Tensor& candidate) {
    const Tensor fz = ForwardBottom(net, candidate);
    double obj = 0.0;
    for (std::size_t k = 0; k < fz.size(); ++k) {
      residual[k] = fz[k] - z[k];
      obj += residual[k] * residual[k];
    }
    return obj;
  };

  double obj = objective(xhat);
  result.reconstruction = xhat;
  result.objective = obj;
  result.objective_trace.push_back(obj);
  for (int step = 0; step < cfg.steps; ++step) {
    const Tensor grad = BottomVjp(net, xhat, residual);
    for (std::size_t i = 0; i < xhat.size(); ++i) {
      xhat[i] -= cfg.lr * 2.0 * grad[i];
    }
    obj = objective(xhat);
    if (!std::isfinite(obj)) {
      throw AttackDivergedError("MLE objective became non-finite at step " +
                                std::to_string(step + 1));
    }
    result.objective_trace.push_back(obj);
    if (obj < result.objective) {
      result.objective = obj;
      result.reconstruction = xhat;
    }
  }
  return result;
}

std::vector<LayerSpec> MirrorDecoderSpecs(const SplitNet& net) {
  std::vector<std::size_t> widths;  // inputs of each bottom dense layer
  for (const Layer& l : net.bottom()) {
    if (l.spec.kind == LayerKind::kDense) widths.push_back(l.in_size());
  }
  std::vector<LayerSpec> specs;
  // Hidden layers retrace the intermediate widths; the last is always d_x.
  for (std::size_t i = widths.size(); i-- > 1;) {
    specs.push_back({LayerKind::kDense, widths[i]});
    specs.push_back({LayerKind::kRelu});
  }
  specs.push_back({LayerKind::kDense, net.input_size()});
  specs.push_back({LayerKind::kTanh});
  return specs;
}

SplitNet TrainInverseNet(const SplitNet& net, const std::vector<Tensor>& aux,
                         const std::vector<LayerSpec>& decoder_arch,
                         int epochs, std::uint64_t seed, double lr,
                         std::size_t batch_size) {
  if (aux.empty()) throw ParameterError("auxiliary set is empty");
  if (decoder_arch.empty()) throw ParameterError("decoder has no layers");
  SplitNet decoder =
      SplitNet::Build(net.smashed_shape(), decoder_arch, decoder_arch.size(),
                      DeriveSeed(seed, 0));
  if (NumElements(decoder.output_shape()) != net.input_size()) {
    throw ParameterError("decoder emits " +
                         std::to_string(NumElements(decoder.output_shape())) +
                         " values, input has " +
                         std::to_string(net.input_size()));
  }
  std::vector<Tensor> smashed;
  smashed.reserve(aux.size());
  for (const Tensor& x : aux) smashed.push_back(ForwardBottom(net, x));
  TrainOptions opts;
  opts.epochs = epochs;
  opts.lr = lr;
  opts.batch_size = batch_size;
  opts.seed = DeriveSeed(seed, 1);
  TrainRegression(decoder, smashed, aux, opts);
  return decoder;
}

Tensor InvertWithDecoder(const SplitNet& decoder, const Tensor& z,
                         const Shape& input_shape) {
  return ForwardFull(decoder, z.Reshaped(decoder.input_shape()))
      .Reshaped(input_shape);
}

double ReconstructionMse(const Tensor& x, const Tensor& xhat) {
  CheckSameShape(x, xhat);
  return SquaredDistance(x, xhat) / static_cast<double>(x.size());
}

double ReconstructionSsim(const Tensor& x, const Tensor& xhat) {
  CheckSameShape(x, xhat);
  const Shape& s = x.shape();
  if (s.size() != 2 && s.size() != 3) {
    throw ShapeError("SSIM needs an [H,W] or [C,H,W] image, got " +
                     ShapeToString(s));
  }
  constexpr double kRange = 2.0;
  constexpr double c1 = (0.01 * kRange) * (0.01 * kRange);
  constexpr double c2 = (0.03 * kRange) * (0.03 * kRange);
  const std::size_t channels = s.size() == 3 ? s[0] : 1;
  const std::size_t plane = x.size() / channels;
  double total = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    const double* a = x.values().data() + c * plane;
    const double* b = xhat.values().data() + c * plane;
    const double n = static_cast<double>(plane);
    double mu_a = 0.0, mu_b = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      mu_a += a[i];
      mu_b += b[i];
    }
    mu_a /= n;
    mu_b /= n;
    double var_a = 0.0, var_b = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      var_a += (a[i] - mu_a) * (a[i] - mu_a);
      var_b += (b[i] - mu_b) * (b[i] - mu_b);
      cov += (a[i] - mu_a) * (b[i] - mu_b);
    }
    var_a /= n;
    var_b /= n;
    cov /= n;
    total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
             ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
  }
  return total / static_cast<double>(channels);
}

double AttackResult::MeanMse() const {
  if (per_sample_mse.empty()) return 0.0;
  return std::accumulate(per_sample_mse.begin(), per_sample_mse.end(), 0.0) /
         static_cast<double>(per_sample_mse.size());
}

std::optional<double> AttackResult::MeanSsim() const {
  if (!per_sample_ssim || per_sample_ssim->empty()) return std::nullopt;
  return std::accumulate(per_sample_ssim->begin(), per_sample_ssim->end(),
                         0.0) /
         static_cast<double>(per_sample_ssim->size());
}

AttackResult RunAttack(const SplitNet& net, const std::vector<Tensor>& targets,
                       const std::vector<Tensor>& smashed,
                       const AttackConfig& cfg,
                       const std::vector<Tensor>& aux) {
  ValidateAttackConfig(cfg);
  if (targets.size() != smashed.size()) {
    throw ParameterError("need one smashed tensor per target");
  }
  if (aux.empty()) throw ParameterError("auxiliary set is empty");
  AttackResult result;
  result.config = cfg;
  const bool images =
      net.input_shape().size() == 2 || net.input_shape().size() == 3;
  if (images) result.per_sample_ssim.emplace();

  if (cfg.method == AttackConfig::Method::kMle) {
    const Tensor aux_mean = MeanOf(aux);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      AttackConfig sample_cfg = cfg;
      sample_cfg.seed = DeriveSeed(cfg.seed, i);
      result.reconstructions.push_back(
          MleInvert(net, smashed[i], sample_cfg, &aux_mean).reconstruction);
    }
  } else {
    const SplitNet decoder =
        TrainInverseNet(net, aux, MirrorDecoderSpecs(net), cfg.steps, cfg.seed,
                        cfg.lr, cfg.batch_size);
    for (std::size_t i = 0; i < targets.size(); ++i) {
      result.reconstructions.push_back(
          InvertWithDecoder(decoder, smashed[i], net.input_shape()));
    }
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Tensor xhat = result.reconstructions[i].Reshaped(targets[i].shape());
    result.per_sample_mse.push_back(ReconstructionMse(targets[i], xhat));
    if (images) {
      result.per_sample_ssim->push_back(ReconstructionSsim(targets[i], xhat));
    }
  }
  return result;
}

void WriteImagePreview(const std::string& path, const Tensor& image) {
  const Shape& s = image.shape();
  std::size_t channels = 1, h = 0, w = 0;
  if (s.size() == 2) {
    h = s[0];
    w = s[1];
  } else if (s.size() == 3 && (s[0] == 1 || s[0] == 3)) {
    channels = s[0];
    h = s[1];
    w = s[2];
  } else {
    throw ShapeError("preview needs [H,W], [1,H,W] or [3,H,W], got " +
                     ShapeToString(s));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path);
  out << (channels == 1 ? "P5" : "P6") << '\n' << w << ' ' << h << "\n255\n";
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const double v = std::clamp(image[(c * h + y) * w + x], -1.0, 1.0);
        out.put(static_cast<char>(
            static_cast<unsigned char>(std::lround((v + 1.0) * 127.5))));
      }
    }
  }
}

}  // namespace fsinfo
