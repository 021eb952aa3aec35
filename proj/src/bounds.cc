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

#include "fsinfo/bounds.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "fsinfo/errors.h"
#include "fsinfo/fisher_metric.h"

namespace fsinfo {
namespace {

double ShannonNats(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  }
  return h;
}

}  // namespace

double LossSpec::ApplyPhi(double t) const {
  switch (phi) {
    case Phi::kIdentity:
      return t;
    case Phi::kSquare:
      return t * t;
    case Phi::kScaledSquare:
      return scale * t * t;
  }
  return t;
}

double LossSpec::Rho(const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b) const {
  return (a - b).norm();
}

void ValidateLossSpec(const LossSpec& spec,
                      const std::vector<Eigen::VectorXd>& packing) {
  if (!(spec.epsilon > 0.0)) throw ParameterError("packing radius must be > 0");
  if (spec.phi == LossSpec::Phi::kScaledSquare && !(spec.scale > 0.0)) {
    throw ParameterError("scaled-square loss needs scale > 0");
  }
  if (spec.ApplyPhi(0.0) != 0.0) throw ParameterError("phi(0) must be 0");
  double prev = 0.0;
  for (int i = 1; i <= 64; ++i) {
    const double v = spec.ApplyPhi(spec.epsilon * i / 16.0);
    if (v < prev) throw ParameterError("phi must be increasing");
    prev = v;
  }
  for (std::size_t i = 0; i < packing.size(); ++i) {
    for (std::size_t j = i + 1; j < packing.size(); ++j) {
      if (spec.Rho(packing[i], packing[j]) < spec.epsilon) {
        throw ParameterError("packing points " + std::to_string(i) + " and " +
                             std::to_string(j) + " are closer than epsilon");
      }
    }
  }
}

EntropyEstimate GaussianEntropy(const std::vector<double>& cov_diag) {
  if (cov_diag.empty()) throw ParameterError("need at least one variance");
  double h = 0.0;
  for (double v : cov_diag) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ParameterError("variances must be finite and > 0");
    }
    h += 0.5 * (kLog2PiE + std::log(v));
  }
  return {h, cov_diag.size(), EntropyEstimate::Source::kAnalyticGaussian};
}

std::pair<EntropyEstimate, EntropyEstimate> DiscreteChannelEntropies(
    const Eigen::MatrixXd& channel) {
  if (channel.rows() < 1 || channel.cols() < 1) {
    throw ParameterError("channel matrix is empty");
  }
  for (Eigen::Index r = 0; r < channel.rows(); ++r) {
    if ((channel.row(r).array() < 0.0).any() ||
        std::abs(channel.row(r).sum() - 1.0) > 1e-9) {
      throw ParameterError("channel rows must be probability vectors");
    }
  }
  const Eigen::VectorXd marginal =
      channel.colwise().mean().transpose();
  double h_cond = 0.0;
  for (Eigen::Index r = 0; r < channel.rows(); ++r) {
    h_cond += ShannonNats(channel.row(r).transpose());
  }
  h_cond /= static_cast<double>(channel.rows());
  using Source = EntropyEstimate::Source;
  return {EntropyEstimate{ShannonNats(marginal), 1, Source::kEmpirical},
          EntropyEstimate{h_cond, 1, Source::kEmpirical}};
}

double AvgCaseMseLowerBound(const EntropyEstimate& h_cond) {
  if (h_cond.d_x < 1) throw ParameterError("d_x must be >= 1");
  const double d = static_cast<double>(h_cond.d_x);
  return std::exp(2.0 * h_cond.value / d - kLog2PiE);
}

double FanoMinimaxLowerBound(const LossSpec& spec,
                             const EntropyEstimate& h_marg,
                             const EntropyEstimate& h_cond,
                             std::size_t packing_size) {
  if (packing_size < 2) {
    throw ParameterError("Fano bound needs a packing of at least 2 points");
  }
  const double info = h_marg.value - h_cond.value;
  const double rhs =
      spec.ApplyPhi(spec.epsilon / 2.0) *
      (1.0 - (info + std::numbers::ln2) /
                 std::log(static_cast<double>(packing_size)));
  return std::max(0.0, rhs);
}

Eigen::MatrixXd CrbCovarianceFloor(const Eigen::MatrixXd& fisher) {
  if (fisher.rows() != fisher.cols() || fisher.rows() == 0) {
    throw ParameterError("Fisher matrix must be square and nonempty");
  }
  if ((fisher - fisher.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw ParameterError("Fisher matrix is not symmetric");
  }
  Eigen::MatrixXd ridged = 0.5 * (fisher + fisher.transpose());
  ridged.diagonal().array() += kFisherFloor;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ridged);
  const auto& ev = eig.eigenvalues();
  const double max_ev = ev.maxCoeff();
  const double min_ev = ev.minCoeff();
  if (!(min_ev > 0.0) ||
      min_ev < max_ev * 64.0 * std::numeric_limits<double>::epsilon()) {
    throw ConditioningError("Fisher matrix is numerically singular (min "
                            "eigenvalue " + std::to_string(min_ev) +
                            ", max " + std::to_string(max_ev) + ")");
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd inv = v * ev.cwiseInverse().asDiagonal() * v.transpose();
  return 0.5 * (inv + inv.transpose());
}

bool DetTraceInequalityCheck(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ParameterError("matrix must be square and nonempty");
  }
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ParameterError("matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.minCoeff() < -1e-10 * scale) {
    throw ParameterError("matrix is not positive semidefinite");
  }
  const double d = static_cast<double>(a.rows());
  double det = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) det *= std::max(ev(i), 0.0);
  const double rhs = std::pow(a.trace() / d, d);
  return det <= rhs * (1.0 + 1e-12) + 1e-12;
}

}  // namespace fsinfo
