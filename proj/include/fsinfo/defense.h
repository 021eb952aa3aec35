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

#ifndef FSINFO_DEFENSE_H_
#define FSINFO_DEFENSE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fsinfo/split_net.h"
#include "fsinfo/tensor.h"

namespace fsinfo {

struct NoisePlan {
  enum class Scheme { kFsinfoGuard, kDfil, kFixed };
  enum class Granularity { kPerSample, kDatasetMean };

  Scheme scheme = Scheme::kFixed;
  // kFsinfoGuard: target FSInfo (nats/dim); kDfil: target dFIL (> 0);
  // kFixed: sigma itself (>= 0).
  double target = 0.0;
  Granularity granularity = Granularity::kPerSample;
};

void ValidateNoisePlan(const NoisePlan& plan);
std::string SchemeName(NoisePlan::Scheme scheme);
NoisePlan::Scheme ParseScheme(const std::string& name);

// log det(J^T J + 1e-10 I) at x, from the singular values of J.
double LogDetJtj(const SplitNet& net, const Tensor& x);

// sigma = det(J^T J)^{1/(2d)} / (e^target sqrt(2 pi e)), in log space.
double CalibrateFsinfoguardSigma(const SplitNet& net, const Tensor& x,
                                 double target_fsinfo);

// sigma = sqrt(tr(J^T J) / (d * dFIL)).
double CalibrateDfilSigma(const SplitNet& net, const Tensor& x,
                          double target_dfil);

// Per-sample sigma for `plan` at x (granularity ignored).
double CalibrateSigma(const SplitNet& net, const Tensor& x,
                      const NoisePlan& plan);

// One sigma for a whole calibration set, chosen so the dataset average of
// the scheme's quantity hits the target: geometric mean of per-sample
// sigmas for FSInfoGuard (mean log-det), RMS for dFIL (mean trace).
double CalibrateDatasetSigma(const SplitNet& net,
                             const std::vector<Tensor>& calibration,
                             const NoisePlan& plan);

// r(z) = z + delta, delta ~ N(0, sigma^2 I) on the bottom-model output.
class NoiseChannel {
 public:
  // `calibration` is required for dataset-mean granularity.
  NoiseChannel(const SplitNet& net, NoisePlan plan,
               const std::vector<Tensor>& calibration = {});

  double SigmaFor(const Tensor& x) const;
  Tensor Apply(const Tensor& x, std::uint64_t seed) const;
  const NoisePlan& plan() const { return plan_; }

 private:
  const SplitNet* net_;
  NoisePlan plan_;
  double dataset_sigma_ = 0.0;
};

// z + delta at x. Dataset-mean plans take their sigma from `calibration`.
Tensor NoisyForward(const SplitNet& net, const Tensor& x,
                    const NoisePlan& plan, std::uint64_t seed,
                    const std::vector<Tensor>& calibration = {});

// Adds N(0, sigma^2) to every entry of z using `seed`.
Tensor AddGaussianNoise(const Tensor& z, double sigma, std::uint64_t seed);

}  // namespace fsinfo

#endif  // FSINFO_DEFENSE_H_
