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

#include "fsinfo/fisher_metric.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "fsinfo/errors.h"

namespace fsinfo {
namespace {

void CheckSigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("noise scale sigma must be finite and > 0, got " +
                         std::to_string(sigma));
  }
}

std::vector<std::size_t> DrawCoordinates(std::size_t d_x, std::size_t k,
                                         std::uint64_t seed) {
  std::vector<std::size_t> idx(d_x);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first k entries are a uniform draw without
  // replacement.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, d_x - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

FisherDiag::FisherDiag(std::vector<double> lambdas, double sigma)
    : lambdas_(std::move(lambdas)), sigma_(sigma) {
  CheckSigma(sigma_);
  if (lambdas_.empty()) throw ParameterError("FisherDiag needs d_x >= 1");
  for (double l : lambdas_) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw ParameterError("Fisher diagonal entries must be finite and >= 0");
    }
  }
}

FisherDiag FisherDiag::FromJtjDiagonal(const std::vector<double>& jtj_diag,
                                       double sigma) {
  CheckSigma(sigma);
  std::vector<double> lambdas(jtj_diag.size());
  const double inv_var = 1.0 / (sigma * sigma);
  for (std::size_t i = 0; i < jtj_diag.size(); ++i) {
    lambdas[i] = jtj_diag[i] * inv_var;
  }
  return FisherDiag(std::move(lambdas), sigma);
}

std::string SubsampleSpec::ToString() const {
  return (kind == Kind::kRandom ? "random:" : "avgpool:") + std::to_string(k);
}

SubsampleSpec SubsampleSpec::Parse(const std::string& text,
                                   std::uint64_t seed) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ParameterError("subsample spec '" + text +
                         "' must be random:<k> or avgpool:<k>");
  }
  SubsampleSpec spec;
  const std::string kind = text.substr(0, colon);
  if (kind == "random") {
    spec.kind = Kind::kRandom;
  } else if (kind == "avgpool") {
    spec.kind = Kind::kAvgPool;
  } else {
    throw ParameterError("unknown subsample kind '" + kind + "'");
  }
  try {
    const long k = std::stol(text.substr(colon + 1));
    if (k <= 0) throw std::invalid_argument("k");
    spec.k = static_cast<std::size_t>(k);
  } catch (const std::logic_error&) {
    throw ParameterError("subsample size in '" + text + "' must be > 0");
  }
  spec.seed = seed;
  return spec;
}

Eigen::MatrixXd FimFull(const Jacobian& jac, double sigma) {
  CheckSigma(sigma);
  Eigen::MatrixXd f = jac.transpose() * jac;
  f /= sigma * sigma;
  // Exact symmetry for downstream factorizations.
  return 0.5 * (f + f.transpose());
}

double FsinfoSample(const FisherDiag& fd) {
  const double d_x = static_cast<double>(fd.d_x());
  double sum_log = 0.0;
  for (double l : fd.lambdas()) sum_log += std::log(l + kFisherFloor);
  return -(d_x * kLog2PiE - sum_log) / (2.0 * d_x);
}

std::pair<Tensor, IndexMap> SubsampleInputs(const Tensor& x,
                                            const SubsampleSpec& spec) {
  const std::size_t d_x = x.size();
  if (spec.k == 0 || spec.k > d_x) {
    throw ParameterError("subsample size " + std::to_string(spec.k) +
                         " must be in [1, d_x=" + std::to_string(d_x) + "]");
  }
  IndexMap map;
  const Eigen::Map<const Eigen::VectorXd> xv(x.values().data(),
                                             static_cast<Eigen::Index>(d_x));
  if (spec.kind == SubsampleSpec::Kind::kRandom) {
    const auto idx = DrawCoordinates(d_x, spec.k, spec.seed);
    std::vector<double> reduced(spec.k);
    map.expand = Eigen::MatrixXd::Zero(d_x, spec.k);
    map.offset = xv;
    for (std::size_t j = 0; j < spec.k; ++j) {
      reduced[j] = x[idx[j]];
      map.expand(idx[j], j) = 1.0;
      map.offset(idx[j]) = 0.0;
    }
    return {Tensor::FromVector(std::move(reduced)), std::move(map)};
  }

  // Average pooling over non-overlapping windows: along the vector for 1-D
  // inputs, over k x k spatial windows per channel for [C,H,W] / [H,W].
  const Shape& s = x.shape();
  Shape reduced_shape;
  std::vector<std::size_t> window_of(d_x);
  const std::size_t k = spec.k;
  if (s.size() == 1) {
    if (d_x % k != 0) {
      throw ParameterError("avgpool window " + std::to_string(k) +
                           " does not divide length " + std::to_string(d_x));
    }
    reduced_shape = {d_x / k};
    for (std::size_t i = 0; i < d_x; ++i) window_of[i] = i / k;
  } else if (s.size() == 2 || s.size() == 3) {
    const std::size_t c = s.size() == 3 ? s[0] : 1;
    const std::size_t h = s[s.size() - 2], w = s[s.size() - 1];
    if (h % k != 0 || w % k != 0) {
      throw ParameterError("avgpool window " + std::to_string(k) +
                           " does not divide spatial dims " +
                           ShapeToString(s));
    }
    const std::size_t oh = h / k, ow = w / k;
    reduced_shape = s.size() == 3 ? Shape{c, oh, ow} : Shape{oh, ow};
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) {
          window_of[(ch * h + y) * w + xx] = (ch * oh + y / k) * ow + xx / k;
        }
      }
    }
  } else {
    throw ParameterError("avgpool subsampling supports 1-D, 2-D or 3-D inputs");
  }
  Tensor reduced(reduced_shape);
  const std::size_t n_windows = reduced.size();
  std::vector<double> counts(n_windows, 0.0);
  map.expand = Eigen::MatrixXd::Zero(d_x, n_windows);
  for (std::size_t i = 0; i < d_x; ++i) {
    reduced[window_of[i]] += x[i];
    counts[window_of[i]] += 1.0;
    map.expand(i, window_of[i]) = 1.0;
  }
  for (std::size_t j = 0; j < n_windows; ++j) reduced[j] /= counts[j];
  const Eigen::Map<const Eigen::VectorXd> rv(
      reduced.values().data(), static_cast<Eigen::Index>(n_windows));
  map.offset = xv - map.expand * rv;
  return {std::move(reduced), std::move(map)};
}

std::vector<double> ReducedJtjDiagonal(const SplitNet& net, const Tensor& x,
                                       const SubsampleSpec& spec) {
  const auto [reduced, map] = SubsampleInputs(x, spec);
  // Chain rule through the linear pre-layer: J_r = J * expand, so each
  // reduced coordinate is a directional derivative along a column.
  return JtjDiagonalAlong(net, x, map.expand);
}

namespace {

LeakageReport BuildReport(const SplitNet& net,
                          const std::vector<Tensor>& inputs,
                          const std::vector<double>& sigmas,
                          const std::optional<SubsampleSpec>& subsample) {
  if (inputs.empty()) throw ParameterError("FSInfo needs a nonempty dataset");
  LeakageReport report;
  report.subsample = subsample;
  report.per_sample_sigma = sigmas;
  report.per_sample_fsinfo.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    CheckSigma(sigmas[i]);
    const auto diag = subsample ? ReducedJtjDiagonal(net, inputs[i], *subsample)
                                : JtjDiagonal(net, inputs[i]);
    const FisherDiag fd = FisherDiag::FromJtjDiagonal(diag, sigmas[i]);
    report.d_x = fd.d_x();
    report.per_sample_fsinfo.push_back(FsinfoSample(fd));
  }
  const double n = static_cast<double>(inputs.size());
  report.mean_fsinfo = std::accumulate(report.per_sample_fsinfo.begin(),
                                       report.per_sample_fsinfo.end(), 0.0) /
                       n;
  report.sigma = std::accumulate(sigmas.begin(), sigmas.end(), 0.0) / n;
  return report;
}

}  // namespace

LeakageReport FsinfoDataset(const SplitNet& net,
                            const std::vector<Tensor>& inputs, double sigma,
                            const std::optional<SubsampleSpec>& subsample) {
  CheckSigma(sigma);
  LeakageReport report = BuildReport(
      net, inputs, std::vector<double>(inputs.size(), sigma), subsample);
  report.sigma = sigma;
  return report;
}

LeakageReport FsinfoDatasetPerSample(
    const SplitNet& net, const std::vector<Tensor>& inputs,
    const std::vector<double>& sigmas,
    const std::optional<SubsampleSpec>& subsample) {
  if (sigmas.size() != inputs.size()) {
    throw ParameterError("need one sigma per sample");
  }
  return BuildReport(net, inputs, sigmas, subsample);
}

double LogDetPsd(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    const auto& l = llt.matrixLLT();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) sum += std::log(l(i, i));
    return 2.0 * sum;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a,
                                                     Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    sum += std::log(std::max(eig.eigenvalues()(i), 0.0));
  }
  return sum;
}

double SaLeakageLowerBound(const Eigen::MatrixXd& fisher) {
  if (fisher.rows() != fisher.cols() || fisher.rows() == 0) {
    throw ParameterError("Fisher matrix must be square and nonempty");
  }
  if ((fisher - fisher.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw ParameterError("Fisher matrix is not symmetric");
  }
  const auto d = fisher.rows();
  Eigen::MatrixXd ridged = fisher;
  ridged.diagonal().array() += kFisherFloor;
  // Eigenvalues of the ridged matrix are at least the floor.
  double logdet = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(ridged);
  if (llt.info() == Eigen::Success) {
    logdet = LogDetPsd(ridged);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ridged,
                                                       Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < d; ++i) {
      logdet += std::log(std::max(eig.eigenvalues()(i), kFisherFloor));
    }
  }
  return -0.5 * (static_cast<double>(d) * kLog2PiE - logdet);
}

std::string LeakageReportCsv(const LeakageReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "sample_index,fsinfo,sigma,d_x,subsample\n";
  const std::string sub = report.subsample ? report.subsample->ToString() : "";
  for (std::size_t i = 0; i < report.per_sample_fsinfo.size(); ++i) {
    const double sigma = i < report.per_sample_sigma.size()
                             ? report.per_sample_sigma[i]
                             : report.sigma;
    out << i << ',' << report.per_sample_fsinfo[i] << ',' << sigma << ','
        << report.d_x << ',' << sub << '\n';
  }
  return out.str();
}

}  // namespace fsinfo
