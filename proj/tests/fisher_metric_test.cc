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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fsinfo/errors.h"
#include "fsinfo/fisher_metric.h"
#include "oracles.h"

namespace fsinfo {
namespace {

const double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;

Eigen::MatrixXd RandomPsd(std::mt19937_64& rng, int d, int rows) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(rows, d);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = n01(rng);
  }
  return a.transpose() * a;
}

TEST(FimFullTest, SmallCases) {
  Eigen::MatrixXd j(1, 1);
  j << 2;
  EXPECT_DOUBLE_EQ(FimFull(j, 1.0)(0, 0), 4.0);
  const Eigen::MatrixXd f = FimFull(Eigen::MatrixXd::Identity(2, 2), 0.5);
  EXPECT_TRUE(f.isApprox(4.0 * Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_THROW(FimFull(j, 0.0), ParameterError);
  EXPECT_THROW(FimFull(j, -1.0), ParameterError);
}

TEST(FimFullTest, MatchesMonteCarloScoreCovariance) {
  Eigen::MatrixXd j(3, 2);
  j << 0.7, -1.2, 0.4, 0.9, -0.3, 1.5;
  const Eigen::MatrixXd exact = FimFull(j, 1.0);
  const Eigen::MatrixXd mc = oracle::MonteCarloFisher(j, 1.0, 1'000'000, 42);
  EXPECT_LT((mc - exact).norm() / exact.norm(), 0.01);
}

TEST(FsinfoSampleTest, ClosedForms) {
  // Zero up to the 1e-10 floor inside the logarithm.
  EXPECT_NEAR(FsinfoSample(FisherDiag({kTwoPiE, kTwoPiE, kTwoPiE}, 1.0)), 0.0,
              1e-9);
  EXPECT_NEAR(FsinfoSample(FisherDiag({1.0, 1.0}, 1.0)), -1.418939, 1e-6);
  EXPECT_NEAR(FsinfoSample(FisherDiag({0.0}, 1.0)), -12.931864, 1e-6);
}

TEST(FisherDiagTest, RejectsNegativeLambdaAndSigma) {
  EXPECT_THROW(FisherDiag({-1.0}, 1.0), ParameterError);
  EXPECT_THROW(FisherDiag({1.0}, 0.0), ParameterError);
  const auto fd = FisherDiag::FromJtjDiagonal({4.0, 1.0}, 2.0);
  EXPECT_EQ(fd.lambdas(), std::vector<double>({1.0, 0.25}));
  EXPECT_EQ(fd.d_x(), 2u);
}

TEST(FsinfoDatasetTest, IdenticalSamplesGiveEqualValues) {
  const SplitNet net = SplitNet::Build(
      {4}, ParseLayerSpecs("dense:3, tanh"), 2, 1);
  const Tensor x = Tensor::FromVector({0.1, -0.5, 0.3, 0.9});
  const LeakageReport r = FsinfoDataset(net, {x, x, x}, 1.0);
  ASSERT_EQ(r.per_sample_fsinfo.size(), 3u);
  EXPECT_EQ(r.per_sample_fsinfo[0], r.per_sample_fsinfo[2]);
  EXPECT_EQ(r.mean_fsinfo, r.per_sample_fsinfo[0]);
}

TEST(FsinfoDatasetTest, IdentityNetWithSigmaTwo) {
  std::mt19937_64 rng(1);
  std::vector<Tensor> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(oracle::RandomInput({3}, rng));
  const LeakageReport r = FsinfoDataset(oracle::IdentityNet(3), xs, 2.0);
  for (double v : r.per_sample_fsinfo) {
    EXPECT_NEAR(v, -0.5 * std::log(kTwoPiE * 4.0), 1e-9);
  }
  EXPECT_EQ(r.sigma, 2.0);
  EXPECT_EQ(r.d_x, 3u);
}

TEST(FsinfoDatasetTest, TwoSampleHandEvaluation) {
  // lambda = w^2 / sigma^2 = 2 pi e and 2 pi e * e^2.
  const SplitNet net = oracle::LinearNet(1, 1, {std::sqrt(kTwoPiE)});
  const Tensor x = Tensor::FromVector({0.0});
  const LeakageReport r =
      FsinfoDatasetPerSample(net, {x, x}, {1.0, 1.0 / std::numbers::e});
  EXPECT_NEAR(r.per_sample_fsinfo[0], 0.0, 1e-11);
  EXPECT_NEAR(r.per_sample_fsinfo[1], 1.0, 1e-11);
  EXPECT_NEAR(r.mean_fsinfo, 0.5, 1e-11);
}

TEST(FsinfoDatasetTest, MeanIsArithmeticMeanOfSamples) {
  std::mt19937_64 rng(2);
  const SplitNet net = SplitNet::Build(
      {5}, ParseLayerSpecs("dense:6, relu, dense:4"), 3, 8);
  std::vector<Tensor> xs;
  for (int i = 0; i < 7; ++i) xs.push_back(oracle::RandomInput({5}, rng));
  const LeakageReport r = FsinfoDataset(net, xs, 0.7);
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double direct =
        FsinfoSample(FisherDiag::FromJtjDiagonal(JtjDiagonal(net, xs[i]), 0.7));
    EXPECT_EQ(r.per_sample_fsinfo[i], direct);
    sum += direct;
  }
  EXPECT_NEAR(r.mean_fsinfo, sum / 7.0, 1e-14);
}

TEST(FsinfoDatasetTest, RejectsEmptyDatasetAndBadSigma) {
  const SplitNet net = oracle::IdentityNet(2);
  EXPECT_THROW(FsinfoDataset(net, {}, 1.0), ParameterError);
  EXPECT_THROW(FsinfoDataset(net, {Tensor::FromVector({1, 2})}, 0.0),
               ParameterError);
}

TEST(FsinfoPropertyTest, SlopeMinusOneInLogSigma) {
  std::mt19937_64 rng(3);
  const SplitNet net = oracle::RandomMlp(rng);
  const Tensor x = oracle::RandomInput(net.input_shape(), rng);
  const auto diag = JtjDiagonal(net, x);
  if (*std::min_element(diag.begin(), diag.end()) < 1e-6) GTEST_SKIP();
  const double a = FsinfoDataset(net, {x}, 0.5).mean_fsinfo;
  const double b = FsinfoDataset(net, {x}, 1.5).mean_fsinfo;
  EXPECT_LT(b, a);
  EXPECT_NEAR(b - a, -std::log(3.0), 1e-6);
}

TEST(FsinfoPropertyTest, ScalingOutputShiftsByLogC) {
  std::mt19937_64 rng(4);
  const SplitNet net = SplitNet::Build({4}, ParseLayerSpecs("dense:5, tanh"), 2, 3);
  std::vector<Tensor> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(oracle::RandomInput({4}, rng));
  const double c = 3.0;
  std::vector<Layer> layers(net.layers().begin(), net.layers().end());
  layers.push_back(oracle::IdentityNet(5, c).layers()[0]);
  const SplitNet scaled({4}, std::move(layers), 3);
  EXPECT_NEAR(FsinfoDataset(scaled, xs, 1.0).mean_fsinfo -
                  FsinfoDataset(net, xs, 1.0).mean_fsinfo,
              std::log(c), 1e-8);
}

TEST(FsinfoPropertyTest, PermutingInputsLeavesValueUnchanged) {
  std::mt19937_64 rng(5);
  const std::size_t dx = 5, dz = 3;
  std::normal_distribution<double> n01;
  std::vector<double> w(dz * dx);
  for (double& e : w) e = n01(rng);
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<double> wp(dz * dx);
  for (std::size_t k = 0; k < dz; ++k) {
    for (std::size_t i = 0; i < dx; ++i) wp[k * dx + i] = w[k * dx + perm[i]];
  }
  const Tensor x = oracle::RandomInput({dx}, rng);
  Tensor xp({dx});
  for (std::size_t i = 0; i < dx; ++i) xp[i] = x[perm[i]];
  const double a = FsinfoDataset(oracle::LinearNet(dx, dz, w), {x}, 1.0).mean_fsinfo;
  const double b = FsinfoDataset(oracle::LinearNet(dx, dz, wp), {xp}, 1.0).mean_fsinfo;
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(SaLeakageTest, ClosedForms) {
  EXPECT_NEAR(SaLeakageLowerBound(kTwoPiE * Eigen::MatrixXd::Identity(3, 3)),
              0.0, 1e-9);
  EXPECT_NEAR(SaLeakageLowerBound(Eigen::MatrixXd::Identity(1, 1)), -1.418939,
              1e-6);
}

TEST(SaLeakageTest, DiagonalMatrixEqualsDxTimesFsinfo) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 6;
    std::vector<double> lambdas(d);
    for (double& l : lambdas) l = u(rng);
    const Eigen::MatrixXd f =
        Eigen::Map<Eigen::VectorXd>(lambdas.data(), d).asDiagonal();
    EXPECT_NEAR(SaLeakageLowerBound(f), d * FsinfoSample(FisherDiag(lambdas, 1.0)),
                1e-8);
  }
}

TEST(SaLeakageTest, NeverExceedsDiagonalApproximation) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 7;
    const Eigen::MatrixXd f = RandomPsd(rng, d, d + 2);
    std::vector<double> diag(d);
    for (int i = 0; i < d; ++i) diag[i] = f(i, i);
    EXPECT_LE(SaLeakageLowerBound(f),
              d * FsinfoSample(FisherDiag(diag, 1.0)) + 1e-9);
  }
}

TEST(SaLeakageTest, RejectsAsymmetricInput) {
  Eigen::MatrixXd f(2, 2);
  f << 1, 0.5, 0.4, 1;
  EXPECT_THROW(SaLeakageLowerBound(f), ParameterError);
}

TEST(LogDetPsdTest, HandlesSingularMatricesWithoutNan) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 2.0;
  const double v = LogDetPsd(a + 1e-10 * Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, std::log(2.0) + 2 * std::log(1e-10), 1e-6);
}

TEST(SubsampleTest, AvgPoolWindowMeans) {
  const auto [reduced, map] =
      SubsampleInputs(Tensor::FromVector({1, 2, 3, 4}),
                      SubsampleSpec{SubsampleSpec::Kind::kAvgPool, 2, 0});
  EXPECT_EQ(reduced.data(), std::vector<double>({1.5, 3.5}));
}

TEST(SubsampleTest, AvgPoolOnImages) {
  const Tensor img({1, 2, 2}, {1, 1, 3, 3});
  const auto [reduced, map] =
      SubsampleInputs(img, SubsampleSpec{SubsampleSpec::Kind::kAvgPool, 2, 0});
  EXPECT_EQ(reduced.data(), std::vector<double>({2.0}));
}

TEST(SubsampleTest, RandomWithFullKIsPermutation) {
  const Tensor x = Tensor::FromVector({5, 1, 4, 2, 3});
  const auto [reduced, map] =
      SubsampleInputs(x, SubsampleSpec{SubsampleSpec::Kind::kRandom, 5, 9});
  auto a = reduced.data();
  auto b = x.data();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(SubsampleTest, RejectsOversizedK) {
  const Tensor x = Tensor::FromVector({1, 2, 3});
  EXPECT_THROW(SubsampleInputs(x, {SubsampleSpec::Kind::kRandom, 4, 0}),
               ParameterError);
  EXPECT_THROW(SubsampleInputs(x, {SubsampleSpec::Kind::kAvgPool, 2, 0}),
               ParameterError);
}

TEST(SubsampleTest, IndexMapReconstructsInput) {
  std::mt19937_64 rng(10);
  const Tensor x = oracle::RandomInput({1, 4, 4}, rng);
  for (const SubsampleSpec spec :
       {SubsampleSpec{SubsampleSpec::Kind::kRandom, 6, 3},
        SubsampleSpec{SubsampleSpec::Kind::kAvgPool, 2, 0}}) {
    const auto [reduced, map] = SubsampleInputs(x, spec);
    const Eigen::VectorXd back =
        map.expand * Eigen::Map<const Eigen::VectorXd>(reduced.data().data(),
                                                       reduced.size()) +
        map.offset;
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_NEAR(back(static_cast<Eigen::Index>(i)), x[i], 1e-12);
    }
  }
}

// Reduced diagonal versus column norms of an explicitly composed network
// whose first layer upsamples the pooled input back to full resolution.
TEST(SubsampleTest, ReducedDiagonalMatchesComposedNetwork) {
  const std::size_t d = 4;
  std::vector<double> up(d * 2, 0.0);  // d x 2, row-major
  up[0 * 2 + 0] = up[1 * 2 + 0] = up[2 * 2 + 1] = up[3 * 2 + 1] = 1.0;
  std::vector<Layer> layers;
  layers.push_back(MakeDense(2, d, up, std::vector<double>(d, 0.0)));
  layers.push_back(oracle::IdentityNet(d).layers()[0]);
  const SplitNet composed({2}, std::move(layers), 2);

  const Tensor x = Tensor::FromVector({0.2, -0.1, 0.7, 0.3});
  const auto reduced_diag =
      ReducedJtjDiagonal(oracle::IdentityNet(d), x,
                         {SubsampleSpec::Kind::kAvgPool, 2, 0});
  const Jacobian jac = InputJacobian(composed, Tensor::FromVector({0.05, 0.5}));
  ASSERT_EQ(reduced_diag.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(reduced_diag[i], jac.col(i).squaredNorm(), 1e-12);
  }
}

TEST(SubsampleTest, ReducedDiagonalMatchesNonlinearComposition) {
  std::mt19937_64 rng(11);
  const SplitNet net = SplitNet::Build({6}, ParseLayerSpecs("dense:4, tanh"), 2, 3);
  const Tensor x = oracle::RandomInput({6}, rng);
  const SubsampleSpec spec{SubsampleSpec::Kind::kRandom, 3, 77};
  const auto [reduced, map] = SubsampleInputs(x, spec);
  // J_r = J(x) * expand, evaluated at the unchanged full input.
  const Eigen::MatrixXd jr = InputJacobian(net, x) * map.expand;
  const auto diag = ReducedJtjDiagonal(net, x, spec);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(diag[i], jr.col(i).squaredNorm(), 1e-12);
}

TEST(SubsampleTest, DatasetReportUsesReducedDimension) {
  std::mt19937_64 rng(12);
  std::vector<Tensor> xs = {oracle::RandomInput({1, 4, 4}, rng)};
  const SplitNet net =
      SplitNet::Build({1, 4, 4}, ParseLayerSpecs("dense:5, tanh"), 2, 1);
  const SubsampleSpec spec{SubsampleSpec::Kind::kAvgPool, 2, 0};
  const LeakageReport r = FsinfoDataset(net, xs, 1.0, spec);
  EXPECT_EQ(r.d_x, 4u);
  ASSERT_TRUE(r.subsample.has_value());
  EXPECT_EQ(r.subsample->ToString(), "avgpool:2");
}

TEST(SubsampleSpecTest, ParseAndPrint) {
  EXPECT_EQ(SubsampleSpec::Parse("random:32", 1).k, 32u);
  EXPECT_EQ(SubsampleSpec::Parse("avgpool:2", 1).ToString(), "avgpool:2");
  EXPECT_THROW(SubsampleSpec::Parse("median:2", 1), ParameterError);
  EXPECT_THROW(SubsampleSpec::Parse("random:0", 1), ParameterError);
}

TEST(LeakageReportCsvTest, HasStableColumns) {
  const LeakageReport r =
      FsinfoDataset(oracle::IdentityNet(2), {Tensor::FromVector({1, 2})}, 1.0);
  const std::string csv = LeakageReportCsv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample_index,fsinfo,sigma,d_x,subsample");
  EXPECT_NE(csv.find("\n0,"), std::string::npos);
}

}  // namespace
}  // namespace fsinfo
