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

// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fsinfo/bounds.h"
#include "fsinfo/correlation.h"
#include "fsinfo/defense.h"
#include "fsinfo/experiment.h"
#include "fsinfo/fisher_metric.h"
#include "oracles.h"

namespace fsinfo {
namespace {

const double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

Outcome JacobianCorrectness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const SplitNet net =
        trial % 4 == 0 ? oracle::RandomConvNet(rng) : oracle::RandomMlp(rng);
    const Tensor x = oracle::RandomInput(net.input_shape(), rng);
    const Eigen::MatrixXd fd = oracle::FiniteDifferenceJacobian(net, x, 1e-5);
    const double err =
        (InputJacobian(net, x) - fd).norm() / std::max(fd.norm(), 1e-12);
    worst = std::max(worst, err);
  }
  const double secs = Seconds(start);
  return {worst < 1e-4 && secs < 30.0,
          Fmt("100 nets, max rel err %.2e (< 1e-4), %.2f s (< 30 s)", worst, secs)};
}

Outcome FsinfoIdentity() {
  std::mt19937_64 rng(1002);
  std::vector<Tensor> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(oracle::RandomInput({5}, rng));
  const double v = FsinfoDataset(oracle::IdentityNet(5), xs, 1.0).mean_fsinfo;
  const double z = FsinfoSample(FisherDiag(std::vector<double>(5, kTwoPiE), 1.0));
  const bool pass = std::abs(v - (-1.418939)) <= 1e-6 && std::abs(z) <= 1e-9;
  return {pass, Fmt("identity sigma=1: %.9f (-1.418939 +- 1e-6); lambda=2pie: %.2e "
                    "(0 +- 1e-9)",
                    v, z)};
}

Outcome FsinfoGuardRoundTrip() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + trial % 5;
    std::vector<double> w(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) w[i * d + i] = u(rng);
    const SplitNet net = oracle::LinearNet(d, d, w);
    const Tensor x = oracle::RandomInput({d}, rng);
    for (double target : {-3.0, -1.0, 0.0, 1.0}) {
      const double sigma = CalibrateFsinfoguardSigma(net, x, target);
      worst = std::max(worst,
                       std::abs(FsinfoDataset(net, {x}, sigma).mean_fsinfo - target));
    }
  }
  const double sigma0 = CalibrateFsinfoguardSigma(
      oracle::IdentityNet(3), Tensor::FromVector({0.1, 0.2, 0.3}), 0.0);
  const bool pass = worst <= 1e-6 && std::abs(sigma0 - 0.241971) <= 1e-6;
  return {pass, Fmt("diagonal nets max |FSInfo - target| %.2e (<= 1e-6); identity "
                    "target 0 sigma %.7f (0.241971 +- 1e-6)",
                    worst, sigma0)};
}

Outcome DfilRoundTrip() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> target_dist(0.1, 10.0);
  double worst = 0.0;
  int nets = 0;
  while (nets < 20) {
    const SplitNet net = oracle::RandomMlp(rng);
    const Tensor x = oracle::RandomInput(net.input_shape(), rng);
    if (InputJacobian(net, x).norm() == 0.0) continue;
    const double target = target_dist(rng);
    const double sigma = CalibrateDfilSigma(net, x, target);
    const double dfil =
        FimFull(InputJacobian(net, x), sigma).trace() / static_cast<double>(x.size());
    worst = std::max(worst, std::abs(dfil - target));
    ++nets;
  }
  return {worst <= 1e-9, Fmt("20 nets, max |Tr(F)/d - target| %.2e (<= 1e-9)", worst)};
}

Outcome CramerRao() {
  const double floor = CrbCovarianceFloor(Eigen::MatrixXd::Constant(1, 1, 4.0))(0, 0);
  std::mt19937_64 rng(1005);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::normal_distribution<double> jitter(0.0, 0.2);
  std::uniform_real_distribution<double> dither(-0.3, 0.3);
  const int n = 100'000;
  const double x = 0.7;
  const std::vector<std::pair<const char*, std::function<double(double)>>> estimators = {
      {"T(z)=z", [](double z) { return z; }},
      {"z+gauss", [&](double z) { return z + jitter(rng); }},
      {"z+dither", [&](double z) { return z + dither(rng); }},
  };
  std::vector<double> vars;
  bool beats = false;
  for (const auto& [name, t] : estimators) {
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = t(x + noise(rng));
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1);
    const double se = var * std::sqrt(2.0 / (n - 1));
    if (var < floor - 3.0 * se) beats = true;
    vars.push_back(var);
  }
  const double rel = std::abs(vars[0] / floor - 1.0);
  return {rel <= 0.03 && !beats,
          Fmt("floor %.4f; T(z)=z var %.5f (rel %.2f%% <= 3%%); others %.5f, %.5f; "
              "none below floor - 3 SE",
              floor, vars[0], 100 * rel, vars[1], vars[2])};
}

Outcome AverageCaseBound() {
  std::mt19937_64 rng(1006);
  const std::size_t d = 4, draws = 100'000;
  double worst = 0.0;
  std::string detail;
  for (double v : {0.1, 0.25, 1.0}) {
    const double bound = AvgCaseMseLowerBound(GaussianEntropy(std::vector<double>(d, v)));
    std::normal_distribution<double> noise(0.0, std::sqrt(v));
    double sq = 0.0;
    for (std::size_t t = 0; t < draws * d; ++t) {
      const double e = noise(rng);
      sq += e * e;
    }
    const double mse = sq / static_cast<double>(draws * d);
    worst = std::max(worst, std::abs(mse / bound - 1.0));
    detail += Fmt("v=%.2f bound %.4f mse %.4f; ", v, bound, mse);
  }
  return {worst <= 0.02, detail + Fmt("max rel gap %.2f%% (<= 2%%)", 100 * worst)};
}

Outcome FanoBound() {
  auto point = [](std::initializer_list<double> v) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) p(i++) = e;
    return p;
  };
  const std::vector<Eigen::VectorXd> unit = {point({0}), point({1}), point({2}),
                                             point({3})};
  const LossSpec spec{LossSpec::Phi::kIdentity, 1.0, 1.0};
  const Eigen::MatrixXd blind = Eigen::MatrixXd::Ones(4, 1);
  const auto [hz, hzx] = DiscreteChannelEntropies(blind);
  const double bound = FanoMinimaxLowerBound(spec, hz, hzx, 4);
  auto loss_of = [](const LossSpec& s) {
    return [s](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return s.Loss(a, b); };
  };
  const double risk = oracle::BruteForceMinimaxRisk(
      unit, blind, oracle::EstimatorCandidates(unit), loss_of(spec));

  std::mt19937_64 rng(1007);
  std::uniform_real_distribution<double> u(0.0, 3.0), w(0.05, 1.0);
  int ok = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + trial % 3, nz = 2 + trial % 2;
    std::vector<Eigen::VectorXd> packing;
    for (std::size_t i = 0; i < n; ++i) packing.push_back(point({u(rng), u(rng)}));
    double eps = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        eps = std::min(eps, (packing[i] - packing[j]).norm());
      }
    }
    const LossSpec s{LossSpec::Phi::kIdentity, 1.0, eps};
    ValidateLossSpec(s, packing);
    Eigen::MatrixXd channel(n, nz);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t z = 0; z < nz; ++z) channel(i, z) = w(rng);
      channel.row(i) /= channel.row(i).sum();
    }
    const auto [h, hc] = DiscreteChannelEntropies(channel);
    const double b = FanoMinimaxLowerBound(s, h, hc, n);
    const double r = oracle::BruteForceMinimaxRisk(
        packing, channel, oracle::EstimatorCandidates(packing), loss_of(s));
    if (b <= r) ++ok;
  }
  const bool pass =
      std::abs(bound - 0.25) <= 1e-12 && std::abs(risk - 1.5) <= 1e-12 && ok == 10;
  return {pass, Fmt("unit packing bound %.4f (0.25), brute-force risk %.4f (1.5); "
                    "%d/10 random packings bound <= risk",
                    bound, risk, ok)};
}

Outcome DetTrace() {
  std::mt19937_64 rng(1008);
  std::normal_distribution<double> n01;
  int ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 10;
    Eigen::MatrixXd a(d + 1, d);
    for (int i = 0; i <= d; ++i) {
      for (int j = 0; j < d; ++j) a(i, j) = n01(rng);
    }
    if (DetTraceInequalityCheck(a.transpose() * a)) ++ok;
  }
  return {ok == 1000, Fmt("%d/1000 random PSD matrices satisfy det <= (tr/d)^d", ok)};
}

std::vector<double> Column(const SweepReport& r,
                           std::optional<double> SweepRow::*field) {
  std::vector<double> out;
  for (const auto& row : r.rows) out.push_back((row.*field).value_or(std::nan("")));
  return out;
}

bool AllOk(const SweepReport& r, std::string& detail) {
  for (const auto& row : r.rows) {
    if (!row.ok()) {
      detail = "row failed: " + row.error;
      return false;
    }
  }
  return true;
}

Outcome CorrelationTrend() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = ReferenceConfig();
  const SweepReport r = RunAuditSweep(cfg);
  const double secs = Seconds(start);
  std::string detail;
  if (!AllOk(r, detail)) return {false, detail};
  const auto fsinfo = Column(r, &SweepRow::fsinfo_mean);
  const auto mse = Column(r, &SweepRow::attack_mse);
  const double rho = Correlation(fsinfo, mse, CorrelationKind::kSpearman);
  std::string points;
  for (std::size_t i = 0; i < fsinfo.size(); ++i) {
    points += Fmt("sp%zu (%.3f, %.3f) ", *r.rows[i].split_point, fsinfo[i], mse[i]);
  }
  return {rho <= -0.5 && secs < 600.0 && r.rows.size() == 4,
          Fmt("spearman %.3f (<= -0.5) over %zu split points, %.1f s (< 600 s); ",
              rho, r.rows.size(), secs) +
              points};
}

Outcome WidthTrend() {
  ExperimentConfig cfg = ReferenceConfig();
  cfg.width_multipliers = {1.0, 2.0};
  cfg.attack.reset();
  const SweepReport r = RunWidthStudy(cfg);
  std::string detail;
  if (!AllOk(r, detail)) return {false, detail};
  const double a = *r.rows[0].fsinfo_mean, b = *r.rows[1].fsinfo_mean;
  return {b > a, Fmt("width %zu: %.4f -> width %zu: %.4f", *r.rows[0].width, a,
                     *r.rows[1].width, b)};
}

Outcome OverfittingTrend() {
  ExperimentConfig cfg = ReferenceConfig();
  cfg.attack.reset();
  const SweepReport r = RunOverfittingStudy(cfg);
  std::string detail;
  if (!AllOk(r, detail)) return {false, detail};
  std::string curve;
  for (const auto& row : r.rows) curve += Fmt("e%d %.4f ", *row.epoch, *row.fsinfo_mean);
  const double e0 = *r.rows[0].fsinfo_mean, early = *r.rows[1].fsinfo_mean;
  const auto curve_values = Column(r, &SweepRow::fsinfo_mean);
  const bool late_rise = curve_values.back() >
                         *std::min_element(curve_values.begin(), curve_values.end());
  return {e0 > early,
          Fmt("epoch 0 %.4f > epoch %d %.4f; late rise %s (not gated); ", e0,
              *r.rows[1].epoch, early, late_rise ? "observed" : "not observed") +
              curve};
}

Outcome DefenseMonotonicity() {
  std::string detail;
  bool pass = true;
  const std::vector<std::pair<NoisePlan::Scheme, std::vector<double>>> grids = {
      {NoisePlan::Scheme::kFsinfoGuard, {0.5, 1.0, 1.5, 2.0, 2.5}},
      {NoisePlan::Scheme::kDfil, {0.1, 0.3, 1.0, 3.0, 10.0}},
  };
  for (const auto& [scheme, grid] : grids) {
    ExperimentConfig cfg = ReferenceConfig();
    cfg.defense_scheme = scheme;
    cfg.defense_strengths = grid;
    cfg.attack.reset();
    const SweepReport r = RunDefenseSweep(cfg);
    std::string err;
    if (!AllOk(r, err)) return {false, err};
    const auto f = Column(r, &SweepRow::fsinfo_mean);
    int inversions = 0;
    for (std::size_t i = 1; i < f.size(); ++i) inversions += f[i] > f[i - 1];
    pass = pass && inversions <= 1;
    detail += SchemeName(scheme) + Fmt(": %d inversions (<= 1) [", inversions);
    for (double v : f) detail += Fmt(" %.3f", v);
    detail += " ]; ";
  }
  return {pass, detail};
}

}  // namespace
}  // namespace fsinfo

int main() {
  using namespace fsinfo;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Jacobian correctness", JacobianCorrectness},
      {"FSInfo analytic identity", FsinfoIdentity},
      {"FSInfoGuard round-trip", FsinfoGuardRoundTrip},
      {"dFIL round-trip", DfilRoundTrip},
      {"Cramer-Rao floor", CramerRao},
      {"Average-case bound", AverageCaseBound},
      {"Fano bound", FanoBound},
      {"Determinant-trace inequality", DetTrace},
      {"FSInfo vs attack MSE correlation", CorrelationTrend},
      {"Width trend", WidthTrend},
      {"Overfitting trend", OverfittingTrend},
      {"Defense monotonicity", DefenseMonotonicity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
