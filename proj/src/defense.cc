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

#include "fsinfo/defense.h"

#include <cmath>
#include <numeric>
#include <random>

#include "fsinfo/errors.h"
#include "fsinfo/fisher_metric.h"

namespace fsinfo {

void ValidateNoisePlan(const NoisePlan& plan) {
  if (!std::isfinite(plan.target)) {
    throw ParameterError("noise plan target must be finite");
  }
  if (plan.scheme == NoisePlan::Scheme::kDfil && !(plan.target > 0.0)) {
    throw ParameterError("dFIL target must be > 0");
  }
  if (plan.scheme == NoisePlan::Scheme::kFixed && plan.target < 0.0) {
    throw ParameterError("fixed sigma must be >= 0");
  }
}

std::string SchemeName(NoisePlan::Scheme scheme) {
  switch (scheme) {
    case NoisePlan::Scheme::kFsinfoGuard:
      return "fsinfoguard";
    case NoisePlan::Scheme::kDfil:
      return "dfil";
    case NoisePlan::Scheme::kFixed:
      return "fixed";
  }
  return "?";
}

NoisePlan::Scheme ParseScheme(const std::string& name) {
  if (name == "fsinfoguard") return NoisePlan::Scheme::kFsinfoGuard;
  if (name == "dfil") return NoisePlan::Scheme::kDfil;
  if (name == "fixed") return NoisePlan::Scheme::kFixed;
  throw ParameterError("unknown defense scheme '" + name + "'");
}

double LogDetJtj(const SplitNet& net, const Tensor& x) {
  const Jacobian jac = InputJacobian(net, x);
  if (jac.cwiseAbs().maxCoeff() == 0.0) {
    throw DegenerateInputError(
        "Jacobian is identically zero; det(J^T J) underflows");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& s = svd.singularValues();
  const Eigen::Index d = jac.cols();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sv = i < s.size() ? s(i) : 0.0;
    logdet += std::log(sv * sv + kFisherFloor);
  }
  return logdet;
}

double CalibrateFsinfoguardSigma(const SplitNet& net, const Tensor& x,
                                 double target_fsinfo) {
  if (!std::isfinite(target_fsinfo)) {
    throw ParameterError("target FSInfo must be finite");
  }
  const double d = static_cast<double>(x.size());
  const double log_sigma =
      LogDetJtj(net, x) / (2.0 * d) - target_fsinfo - 0.5 * kLog2PiE;
  return std::exp(log_sigma);
}

double CalibrateDfilSigma(const SplitNet& net, const Tensor& x,
                          double target_dfil) {
  if (!(target_dfil > 0.0) || !std::isfinite(target_dfil)) {
    throw ParameterError("target dFIL must be finite and > 0");
  }
  const auto diag = JtjDiagonal(net, x);
  const double trace = std::accumulate(diag.begin(), diag.end(), 0.0);
  if (trace == 0.0) {
    throw DegenerateInputError("tr(J^T J) is zero; dFIL noise is undefined");
  }
  return std::sqrt(trace / (static_cast<double>(x.size()) * target_dfil));
}

double CalibrateSigma(const SplitNet& net, const Tensor& x,
                      const NoisePlan& plan) {
  ValidateNoisePlan(plan);
  switch (plan.scheme) {
    case NoisePlan::Scheme::kFsinfoGuard:
      return CalibrateFsinfoguardSigma(net, x, plan.target);
    case NoisePlan::Scheme::kDfil:
      return CalibrateDfilSigma(net, x, plan.target);
    case NoisePlan::Scheme::kFixed:
      return plan.target;
  }
  return plan.target;
}

double CalibrateDatasetSigma(const SplitNet& net,
                             const std::vector<Tensor>& calibration,
                             const NoisePlan& plan) {
  ValidateNoisePlan(plan);
  if (plan.scheme == NoisePlan::Scheme::kFixed) return plan.target;
  if (calibration.empty()) {
    throw ParameterError("dataset-mean calibration needs a calibration set");
  }
  const double n = static_cast<double>(calibration.size());
  if (plan.scheme == NoisePlan::Scheme::kFsinfoGuard) {
    double mean_log = 0.0;
    for (const Tensor& x : calibration) {
      mean_log += std::log(CalibrateFsinfoguardSigma(net, x, plan.target));
    }
    return std::exp(mean_log / n);
  }
  double mean_sq = 0.0;
  for (const Tensor& x : calibration) {
    const double s = CalibrateDfilSigma(net, x, plan.target);
    mean_sq += s * s;
  }
  return std::sqrt(mean_sq / n);
}

Tensor AddGaussianNoise(const Tensor& z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("noise sigma must be finite and >= 0");
  }
  Tensor out = z;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out.values()) v += normal(rng);
  return out;
}

NoiseChannel::NoiseChannel(const SplitNet& net, NoisePlan plan,
                           const std::vector<Tensor>& calibration)
    : net_(&net), plan_(plan) {
  ValidateNoisePlan(plan_);
  if (plan_.granularity == NoisePlan::Granularity::kDatasetMean) {
    dataset_sigma_ = CalibrateDatasetSigma(net, calibration, plan_);
  }
}

double NoiseChannel::SigmaFor(const Tensor& x) const {
  if (plan_.granularity == NoisePlan::Granularity::kDatasetMean) {
    return dataset_sigma_;
  }
  return CalibrateSigma(*net_, x, plan_);
}

Tensor NoiseChannel::Apply(const Tensor& x, std::uint64_t seed) const {
  return AddGaussianNoise(ForwardBottom(*net_, x), SigmaFor(x), seed);
}

Tensor NoisyForward(const SplitNet& net, const Tensor& x,
                    const NoisePlan& plan, std::uint64_t seed,
                    const std::vector<Tensor>& calibration) {
  return NoiseChannel(net, plan, calibration).Apply(x, seed);
}

}  // namespace fsinfo
