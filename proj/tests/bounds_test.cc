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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fsinfo/bounds.h"
#include "fsinfo/errors.h"
#include "fsinfo/fisher_metric.h"
#include "oracles.h"

namespace fsinfo {
namespace {

const double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

EntropyEstimate Nats(double value, std::size_t d = 1) {
  return {value, d, EntropyEstimate::Source::kEmpirical};
}

Eigen::VectorXd Point(std::initializer_list<double> v) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) p(i++) = e;
  return p;
}

TEST(GaussianEntropyTest, ClosedForms) {
  EXPECT_NEAR(GaussianEntropy({1.0 / kTwoPiE}).value, 0.0, 1e-15);
  const auto h = GaussianEntropy({1.0, 1.0});
  EXPECT_NEAR(h.value, 2.837877, 1e-6);
  EXPECT_EQ(h.d_x, 2u);
  EXPECT_EQ(h.source, EntropyEstimate::Source::kAnalyticGaussian);
}

TEST(GaussianEntropyTest, MatchesQuadrature) {
  for (double v : {0.25, 1.0, 3.0}) {
    EXPECT_NEAR(GaussianEntropy({v}).value,
                oracle::GaussianEntropyByQuadrature(v), 1e-4);
  }
}

TEST(GaussianEntropyTest, RejectsNonPositiveVariance) {
  EXPECT_THROW(GaussianEntropy({1.0, 0.0}), ParameterError);
  EXPECT_THROW(GaussianEntropy({-1.0}), ParameterError);
}

TEST(AvgCaseBoundTest, ClosedForms) {
  EXPECT_NEAR(AvgCaseMseLowerBound(Nats(0.5 * std::log(kTwoPiE * 0.25))), 0.25,
              1e-12);
  EXPECT_NEAR(AvgCaseMseLowerBound(Nats(0.0)), 0.058550, 1e-6);
}

TEST(AvgCaseBoundTest, GaussianAdversaryAttainsBound) {
  std::mt19937_64 rng(5);
  const std::size_t d = 3, draws = 100'000;
  for (double v : {0.1, 0.25, 1.0}) {
    const double bound =
        AvgCaseMseLowerBound(GaussianEntropy(std::vector<double>(d, v)));
    EXPECT_NEAR(bound, v, 1e-12);
    std::normal_distribution<double> noise(0.0, std::sqrt(v));
    double sq = 0.0;
    for (std::size_t t = 0; t < draws * d; ++t) {
      const double e = noise(rng);
      sq += e * e;
    }
    const double mse = sq / static_cast<double>(draws * d);
    EXPECT_NEAR(mse / bound, 1.0, 0.02);
  }
}

TEST(AvgCaseBoundTest, BoundRisesAsLeakageFalls) {
  // SA adversary has covariance F^{-1}; its entropy is minus the leakage.
  std::mt19937_64 rng(6);
  const SplitNet net = SplitNet::Build({3}, ParseLayerSpecs("dense:4, tanh"), 2, 2);
  const Tensor x = oracle::RandomInput({3}, rng);
  const Jacobian jac = InputJacobian(net, x);
  double prev_leak = std::numeric_limits<double>::infinity();
  double prev_bound = 0.0;
  for (double sigma : {0.1, 0.3, 1.0, 3.0}) {
    const double leak = SaLeakageLowerBound(FimFull(jac, sigma));
    const double bound = AvgCaseMseLowerBound(Nats(-leak, 3));
    EXPECT_LT(leak, prev_leak);
    EXPECT_GT(bound, prev_bound);
    prev_leak = leak;
    prev_bound = bound;
  }
}

TEST(FanoBoundTest, ZeroInformationFourPointPacking) {
  const LossSpec spec{LossSpec::Phi::kIdentity, 1.0, 1.0};
  EXPECT_NEAR(FanoMinimaxLowerBound(spec, Nats(0.7), Nats(0.7), 4), 0.25, 1e-12);
}

TEST(FanoBoundTest, BruteForceRiskDominatesOnUnitPacking) {
  const std::vector<Eigen::VectorXd> packing = {Point({0}), Point({1}),
                                                Point({2}), Point({3})};
  const LossSpec spec{LossSpec::Phi::kIdentity, 1.0, 1.0};
  ValidateLossSpec(spec, packing);
  const Eigen::MatrixXd channel = Eigen::MatrixXd::Ones(4, 1);
  const auto [hz, hzx] = DiscreteChannelEntropies(channel);
  const double bound = FanoMinimaxLowerBound(spec, hz, hzx, 4);
  const double risk = oracle::BruteForceMinimaxRisk(
      packing, channel, oracle::EstimatorCandidates(packing),
      [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return spec.Loss(a, b);
      });
  EXPECT_NEAR(bound, 0.25, 1e-12);
  EXPECT_NEAR(risk, 1.5, 1e-12);
  EXPECT_GE(risk, bound);
}

TEST(FanoBoundTest, PerfectChannelClampsToZero) {
  const auto [hz, hzx] = DiscreteChannelEntropies(Eigen::MatrixXd::Identity(4, 4));
  const LossSpec spec{LossSpec::Phi::kIdentity, 1.0, 1.0};
  EXPECT_EQ(FanoMinimaxLowerBound(spec, hz, hzx, 4), 0.0);
}

TEST(FanoBoundTest, RejectsTinyPacking) {
  const LossSpec spec;
  EXPECT_THROW(FanoMinimaxLowerBound(spec, Nats(0), Nats(0), 1), ParameterError);
}

TEST(FanoBoundTest, RandomPackingsNeverExceedBruteForceRisk) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + trial % 3;
    const std::size_t nz = 2 + trial % 2;
    std::vector<Eigen::VectorXd> packing;
    for (std::size_t i = 0; i < n; ++i) packing.push_back(Point({u(rng), u(rng)}));
    double eps = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        eps = std::min(eps, (packing[i] - packing[j]).norm());
      }
    }
    const LossSpec spec{trial % 2 ? LossSpec::Phi::kSquare : LossSpec::Phi::kIdentity,
                        1.0, eps};
    ValidateLossSpec(spec, packing);
    Eigen::MatrixXd channel(n, nz);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t z = 0; z < nz; ++z) channel(i, z) = w(rng);
      channel.row(i) /= channel.row(i).sum();
    }
    const auto [hz, hzx] = DiscreteChannelEntropies(channel);
    const double bound = FanoMinimaxLowerBound(spec, hz, hzx, n);
    const double risk = oracle::BruteForceMinimaxRisk(
        packing, channel, oracle::EstimatorCandidates(packing),
        [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
          return spec.Loss(a, b);
        });
    EXPECT_GE(bound, 0.0);
    EXPECT_LE(bound, risk) << "trial " << trial;
  }
}

TEST(DiscreteChannelTest, Entropies) {
  const auto [h1, c1] = DiscreteChannelEntropies(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_NEAR(h1.value, std::log(4.0), 1e-12);
  EXPECT_NEAR(c1.value, 0.0, 1e-12);
  const auto [h2, c2] =
      DiscreteChannelEntropies(Eigen::MatrixXd::Constant(3, 2, 0.5));
  EXPECT_NEAR(h2.value, std::log(2.0), 1e-12);
  EXPECT_NEAR(c2.value, std::log(2.0), 1e-12);
  Eigen::MatrixXd bad(1, 2);
  bad << 0.7, 0.7;
  EXPECT_THROW(DiscreteChannelEntropies(bad), ParameterError);
}

TEST(LossSpecTest, ValidationAndPhi) {
  const LossSpec sq{LossSpec::Phi::kScaledSquare, 3.0, 1.0};
  EXPECT_DOUBLE_EQ(sq.ApplyPhi(2.0), 12.0);
  EXPECT_DOUBLE_EQ(sq.Loss(Point({0, 0}), Point({3, 4})), 75.0);
  EXPECT_THROW(ValidateLossSpec(sq, {Point({0}), Point({0.5})}), ParameterError);
  EXPECT_THROW(ValidateLossSpec({LossSpec::Phi::kIdentity, 1.0, 0.0}, {}),
               ParameterError);
  EXPECT_THROW(ValidateLossSpec({LossSpec::Phi::kScaledSquare, -1.0, 1.0}, {}),
               ParameterError);
}

TEST(CrbTest, ClosedForms) {
  EXPECT_NEAR(CrbCovarianceFloor(Eigen::MatrixXd::Constant(1, 1, 4.0))(0, 0), 0.25,
              1e-9);
  const Eigen::MatrixXd iso = CrbCovarianceFloor(5.0 * Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(iso.isApprox(0.2 * Eigen::MatrixXd::Identity(3, 3), 1e-9));
  Eigen::MatrixXd f(2, 2);
  f << 2, 0, 0, 8;
  const Eigen::MatrixXd inv = CrbCovarianceFloor(f);
  EXPECT_NEAR(inv(0, 0), 0.5, 1e-9);
  EXPECT_NEAR(inv(1, 1), 0.125, 1e-9);
  EXPECT_NEAR(inv(0, 1), 0.0, 1e-12);
}

TEST(CrbTest, SingularFisherIsAConditioningError) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2, 2);
  f(0, 0) = 1.0;
  f(1, 1) = -1e-10;
  EXPECT_THROW(CrbCovarianceFloor(f), ConditioningError);
}

TEST(CrbTest, TrivialEstimatorIsEfficient) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.5);
  const double x = 0.3;
  const double floor = CrbCovarianceFloor(Eigen::MatrixXd::Constant(1, 1, 4.0))(0, 0);
  const int n = 100'000;
  double sum = 0, sq = 0;
  for (int t = 0; t < n; ++t) {
    const double z = x + noise(rng);
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(var / floor, 1.0, 0.03);
}

TEST(CrbTest, UnbiasedEstimatorsDominateFloorInLownerOrder) {
  std::mt19937_64 rng(10);
  Eigen::MatrixXd cov(2, 2);
  cov << 0.5, 0.2, 0.2, 0.3;
  const Eigen::MatrixXd floor = CrbCovarianceFloor(cov.inverse());
  const Eigen::LLT<Eigen::MatrixXd> chol(cov);
  std::normal_distribution<double> n01;
  const Eigen::Vector2d x(1.0, -2.0);
  const int n = 100'000;
  // T1(z) = z; T2(z) = z + independent zero-mean jitter.
  for (double jitter : {0.0, 0.2}) {
    Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector2d> samples(n);
    for (int t = 0; t < n; ++t) {
      const Eigen::Vector2d e(n01(rng), n01(rng));
      samples[t] = x + chol.matrixL() * e +
                   jitter * Eigen::Vector2d(n01(rng), n01(rng));
      mean += samples[t];
    }
    mean /= n;
    for (const auto& s : samples) acc += (s - mean) * (s - mean).transpose();
    acc /= (n - 1);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(acc - floor);
    // Standard error of a sample variance is about var * sqrt(2 / n).
    const double se = cov.maxCoeff() * std::sqrt(2.0 / n);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -3.0 * se) << "jitter " << jitter;
  }
}

TEST(DetTraceTest, ExamplesAndRandomMatrices) {
  EXPECT_TRUE(DetTraceInequalityCheck(Eigen::MatrixXd::Identity(4, 4)));
  EXPECT_TRUE(DetTraceInequalityCheck(Eigen::Vector2d(1, 3).asDiagonal().toDenseMatrix()));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 8;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) a(i, j) = n01(rng);
    }
    EXPECT_TRUE(DetTraceInequalityCheck(a.transpose() * a));
  }
}

TEST(DetTraceTest, RejectsNonPsd) {
  EXPECT_THROW(DetTraceInequalityCheck(Eigen::Vector2d(1, -3).asDiagonal().toDenseMatrix()),
               ParameterError);
}

}  // namespace
}  // namespace fsinfo
