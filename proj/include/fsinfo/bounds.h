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

#ifndef FSINFO_BOUNDS_H_
#define FSINFO_BOUNDS_H_

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace fsinfo {

struct EntropyEstimate {
  enum class Source { kAnalyticGaussian, kEmpirical };
  double value = 0.0;  // nats
  std::size_t d_x = 1;
  Source source = Source::kAnalyticGaussian;
};

// Loss l(x, xhat) = phi(rho(x, xhat)) with euclidean rho.
struct LossSpec {
  enum class Phi { kIdentity, kSquare, kScaledSquare };
  Phi phi = Phi::kIdentity;
  double scale = 1.0;    // kScaledSquare: phi(t) = scale * t^2
  double epsilon = 1.0;  // packing radius

  double ApplyPhi(double t) const;
  double Rho(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double Loss(const Eigen::VectorXd& x, const Eigen::VectorXd& xhat) const {
    return ApplyPhi(Rho(x, xhat));
  }
};

// Checks phi(0) = 0, monotone phi, epsilon > 0 and that every pair in
// `packing` is at least epsilon apart. Throws ParameterError otherwise.
void ValidateLossSpec(const LossSpec& spec,
                      const std::vector<Eigen::VectorXd>& packing);

// 1/2 sum ln(2 pi e v_i).
EntropyEstimate GaussianEntropy(const std::vector<double>& cov_diag);

// Shannon entropies (nats) of a discrete channel with uniform input:
// returns {H(output), H(output | input)}. Rows of `channel` are P(. | x).
std::pair<EntropyEstimate, EntropyEstimate> DiscreteChannelEntropies(
    const Eigen::MatrixXd& channel);

// exp((2/d_x) H) / (2 pi e): floor on per-dimension MSE of any adversary.
double AvgCaseMseLowerBound(const EntropyEstimate& h_cond);

// max(0, phi(eps/2) (1 - (H(Xhat) - H(Xhat|X) + ln 2) / ln |X|)).
double FanoMinimaxLowerBound(const LossSpec& spec,
                             const EntropyEstimate& h_marg,
                             const EntropyEstimate& h_cond,
                             std::size_t packing_size);

// F^{-1} after a 1e-10 ridge. Throws ConditioningError when still singular.
Eigen::MatrixXd CrbCovarianceFloor(const Eigen::MatrixXd& fisher);

// det(A) <= (tr(A)/d)^d for symmetric PSD A, within 1e-12 relative slack.
bool DetTraceInequalityCheck(const Eigen::MatrixXd& a);

}  // namespace fsinfo

#endif  // FSINFO_BOUNDS_H_
