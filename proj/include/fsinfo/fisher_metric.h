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

#ifndef FSINFO_FISHER_METRIC_H_
#define FSINFO_FISHER_METRIC_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fsinfo/split_net.h"
#include "fsinfo/tensor.h"

namespace fsinfo {

// ln(2*pi*e).
inline constexpr double kLog2PiE = 2.8378770664093453;
// Floor added to Fisher eigen/diagonal terms before taking logs.
inline constexpr double kFisherFloor = 1e-10;

// Diagonal of F = J^T J / sigma^2 for one sample.
class FisherDiag {
 public:
  FisherDiag(std::vector<double> lambdas, double sigma);
  // lambda_i = jtj_diag_i / sigma^2.
  static FisherDiag FromJtjDiagonal(const std::vector<double>& jtj_diag,
                                    double sigma);

  const std::vector<double>& lambdas() const { return lambdas_; }
  double sigma() const { return sigma_; }
  std::size_t d_x() const { return lambdas_.size(); }

 private:
  std::vector<double> lambdas_;
  double sigma_;
};

// Input reduction applied before the Jacobian is taken.
struct SubsampleSpec {
  enum class Kind { kRandom, kAvgPool };
  Kind kind = Kind::kRandom;
  std::size_t k = 0;  // random: coordinates kept; avgpool: window size
  std::uint64_t seed = 0;

  std::string ToString() const;  // "random:32" / "avgpool:2"
  static SubsampleSpec Parse(const std::string& text, std::uint64_t seed);
};

// Linear pre-layer mapping the reduced input back into the full input
// space: x_full = expand * x_reduced + offset, with offset chosen so the
// composition reproduces the original x exactly.
struct IndexMap {
  Eigen::MatrixXd expand;  // d_x x k
  Eigen::VectorXd offset;  // d_x
};

struct LeakageReport {
  std::vector<double> per_sample_fsinfo;
  double mean_fsinfo = 0.0;  // nats per input dimension
  std::vector<double> per_sample_sigma;
  double sigma = 0.0;  // shared sigma, or the mean of per-sample values
  std::size_t d_x = 0;
  double epsilon_floor = kFisherFloor;
  std::optional<SubsampleSpec> subsample;
};

// J^T J / sigma^2.
Eigen::MatrixXd FimFull(const Jacobian& jac, double sigma);

// -(1/(2 d_x)) [d_x ln(2 pi e) - sum_i ln(lambda_i + 1e-10)].
double FsinfoSample(const FisherDiag& fd);

// Per-sample FSInfo of the bottom model over `inputs`, all at noise `sigma`.
LeakageReport FsinfoDataset(const SplitNet& net,
                            const std::vector<Tensor>& inputs, double sigma,
                            const std::optional<SubsampleSpec>& subsample =
                                std::nullopt);

// Same, but sample i uses sigmas[i] (per-sample calibrated defenses).
LeakageReport FsinfoDatasetPerSample(
    const SplitNet& net, const std::vector<Tensor>& inputs,
    const std::vector<double>& sigmas,
    const std::optional<SubsampleSpec>& subsample = std::nullopt);

// -(1/2) [d_x ln(2 pi e) - logdet(F + 1e-10 I)]; the full-determinant
// leakage of the strongest unbiased adversary.
double SaLeakageLowerBound(const Eigen::MatrixXd& fisher);

// log det(A) of a symmetric PSD matrix via Cholesky, falling back to a
// clamped eigendecomposition when the factorization fails.
double LogDetPsd(const Eigen::MatrixXd& a);

std::pair<Tensor, IndexMap> SubsampleInputs(const Tensor& x,
                                            const SubsampleSpec& spec);

// diag(J_r^T J_r) where J_r is the Jacobian w.r.t. the reduced input.
std::vector<double> ReducedJtjDiagonal(const SplitNet& net, const Tensor& x,
                                       const SubsampleSpec& spec);

// CSV rows: sample_index,fsinfo,sigma,d_x,subsample
std::string LeakageReportCsv(const LeakageReport& report);

}  // namespace fsinfo

#endif  // FSINFO_FISHER_METRIC_H_
