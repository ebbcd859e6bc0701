// Copyright 2026 The DP-ULR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpulr/controller.h"

#include <gtest/gtest.h>

#include <cmath>

#include "dpulr/error.h"
#include "oracles/eigen_oracle.h"
#include "test_util.h"

namespace dpulr {
namespace {

using testing::RelDiff;
using testing::SeededNet;
using testing::SeededVector;

ControllerSettings Settings(std::size_t k, double c, double s0) {
  ControllerSettings s;
  s.repeats = k;
  s.clip = c;
  s.sigma0 = s0;
  return s;
}

// Σ over a seeded batch of L²JᵀJ for a 2 → 2 identity layer (6 params).
Matrix SeededBatchCovariance(std::uint64_t seed, std::size_t batch) {
  const ModelParams p = SeededNet({{2, 2, Activation::kIdentity}}, seed);
  Matrix sum(6, 6);
  for (std::size_t b = 0; b < batch; ++b) {
    const Vector x = SeededVector(2, seed * 1000 + b);
    const ForwardTrace t = ForwardClean(x, b % 2, p);
    sum += StandardCovariance(t, LayerJacobian(t, p, 0));
  }
  return sum;
}

TEST(SelectSigma, ScaledIdentity) {
  for (double b : {0.5, 3.0, 40.0}) {
    const SigmaSelection sel = SelectSigma(Matrix::Identity(5) * b, 4, 1.0, 2.0);
    EXPECT_FALSE(sel.remediate);
    EXPECT_NEAR(sel.min_eig, b, 1e-14 * b);
    EXPECT_NEAR(sel.sigma, std::sqrt(b / 16.0), 1e-14);
  }
}

TEST(SelectSigma, RankDeficientSignalsRemediation) {
  Matrix m(3, 3);
  AddOuterProduct(m, Vector{1.0, 1.0, 0.0});
  AddOuterProduct(m, Vector{0.0, 1.0, 1.0});
  const SigmaSelection sel = SelectSigma(m, 4, 1.0, 2.0);
  EXPECT_TRUE(sel.remediate);
  EXPECT_EQ(sel.sigma, 0.0);
  EXPECT_FALSE(CheckAssumptionFullRank(m).full_rank);
  EXPECT_EQ(CheckAssumptionFullRank(m).rank, 2u);
}

TEST(SelectSigma, SeededBatchMatchesOracle) {
  const Matrix cov = SeededBatchCovariance(21, 8);
  const oracle::SymmetricOracle o(cov.data(), 6);
  const SigmaSelection sel = SelectSigma(cov, 100, 1.0, 4.0);
  ASSERT_FALSE(sel.remediate);
  EXPECT_LT(RelDiff(sel.min_eig, o.Min()), 1e-9);
  EXPECT_LT(RelDiff(sel.sigma, std::sqrt(o.Min() / (100.0 * 16.0))), 1e-9);
}

TEST(FullRank, HoldsAcrossSeeds) {
  int full = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    full += CheckAssumptionFullRank(SeededBatchCovariance(seed, 8)).full_rank;
  }
  EXPECT_EQ(full, 100);
}

TEST(MinEig, AddingAnExampleNeverDecreases) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    double prev = 0.0;
    for (std::size_t b = 1; b <= 8; ++b) {
      const double m = SelectSigma(SeededBatchCovariance(seed, b), 1, 1.0, 1.0).min_eig;
      EXPECT_GE(m, prev * (1.0 - 1e-12)) << "seed " << seed << " batch " << b;
      prev = m;
    }
  }
}

TEST(Plan, ZeroMatrixFallsBackToIsotropic) {
  const NoisePlan plan = PlanDense(Matrix(3, 3), Settings(4, 1.5, 2.0));
  EXPECT_TRUE(plan.report.remediated);
  EXPECT_EQ(plan.null_std, 3.0);
  EXPECT_TRUE(plan.range_std.empty());
  EXPECT_EQ(plan.report.extra_noise_variances, (Vector{9.0, 9.0, 9.0}));
  RngStream rng(1);
  EXPECT_EQ(DrawPlanNoise(plan, rng).size(), 3u);
}

TEST(Plan, FullRankNeedsNoExtraNoise) {
  const NoisePlan plan = PlanDense(Matrix::Identity(4) * 7.0, Settings(2, 1.0, 1.0));
  EXPECT_FALSE(plan.report.remediated);
  EXPECT_FALSE(plan.has_noise());
  RngStream rng(2);
  EXPECT_EQ(DrawPlanNoise(plan, rng), Vector(4, 0.0));
}

TEST(Plan, TopUpVariancesFillTheFloor) {
  // diag(9, 4, 0): rank 2, budget 9 under the default working σ.
  const Matrix m = Matrix::Diagonal(Vector{4.0, 9.0, 0.0});
  const ControllerSettings s = Settings(1, 1.0, 2.0);
  const NoisePlan plan = PlanDense(m, s);
  ASSERT_TRUE(plan.report.remediated);
  EXPECT_NEAR(plan.report.sigma, std::sqrt(9.0 / 4.0), 1e-15);
  const Vector& v = plan.report.extra_noise_variances;
  ASSERT_EQ(v.size(), 3u);
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], 4.0 * (1.0 - 4.0 / 9.0), 1e-14);
  EXPECT_NEAR(v[2], 4.0, 1e-15);

  ControllerSettings small = s;
  small.working_sigma = WorkingSigma::kSmallestPositive;
  const NoisePlan p2 = PlanDense(m, small);
  EXPECT_NEAR(p2.report.sigma, 1.0, 1e-15);
  EXPECT_NEAR(p2.report.extra_noise_variances[1], 0.0, 1e-15);
}

TEST(Plan, DrawnNoiseHasPlannedCovariance) {
  Matrix m(3, 3);
  AddOuterProduct(m, Vector{2.0, 1.0, 0.0});
  AddOuterProduct(m, Vector{0.0, 1.0, -1.0});
  const NoisePlan plan = PlanDense(m, Settings(1, 1.0, 1.0));
  ASSERT_TRUE(plan.report.remediated);
  // V diag(extra) Vᵀ with the null direction at σ₀²C².
  const EigenDecomposition e = SymEigendecompose(m);
  Matrix want(3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    Vector col(3);
    for (std::size_t r = 0; r < 3; ++r) col[r] = e.eigenvectors(r, i);
    AddOuterProduct(want, col, plan.report.extra_noise_variances[i]);
  }
  RngStream rng(3);
  const std::size_t n = 200000;
  Matrix got(3, 3);
  for (std::size_t s = 0; s < n; ++s) AddOuterProduct(got, DrawPlanNoise(plan, rng));
  got *= 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_NEAR(got.data()[i], want.data()[i], 0.02) << "entry " << i;
  }
}

TEST(Plan, LinearLayerMatchesDenseBlock) {
  for (std::size_t batch : {2u, 6u}) {
    Matrix a(batch, 4);
    for (std::size_t b = 0; b < batch; ++b) {
      const Vector x = SeededVector(3, 60 + b);
      const double loss = 0.5 + b;
      for (std::size_t c = 0; c < 3; ++c) a(b, c) = loss * x[c];
      a(b, 3) = loss;
    }
    const ControllerSettings s = Settings(3, 1.0, 1.0);
    const NoisePlan lin = PlanLinearLayer(a, 2, s);
    const NoisePlan dense = PlanDense(Gram(a), s);
    EXPECT_TRUE(lin.linear_layout);
    EXPECT_EQ(lin.replicas, 2u);
    EXPECT_EQ(lin.report.remediated, dense.report.remediated);
    EXPECT_NEAR(lin.report.sigma, dense.report.sigma, 1e-12);
    ASSERT_EQ(lin.report.extra_noise_variances.size(),
              dense.report.extra_noise_variances.size());
    for (std::size_t i = 0; i < lin.report.extra_noise_variances.size(); ++i) {
      EXPECT_NEAR(lin.report.extra_noise_variances[i],
                  dense.report.extra_noise_variances[i], 1e-10);
    }
    RngStream rng(4);
    EXPECT_EQ(DrawPlanNoise(lin, rng).size(), 8u);
  }
}

TEST(SigmaCap, ForcesTopUpPath) {
  const Matrix m = Matrix::Diagonal(Vector{64.0, 16.0});
  ControllerSettings s = Settings(4, 1.0, 2.0);
  const NoisePlan plain = PlanDense(m, s);
  EXPECT_FALSE(plain.report.remediated);
  EXPECT_NEAR(plain.report.sigma, 1.0, 1e-15);
  s.sigma_cap = 1.5;
  const NoisePlan capped = PlanDense(m, s);
  ASSERT_TRUE(capped.report.remediated);
  EXPECT_NEAR(capped.report.sigma, 1.5, 1e-15);
  const Vector& v = capped.report.extra_noise_variances;
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], 4.0 * (1.0 - 16.0 / 36.0), 1e-14);
  // A cap at or below the floor-matching σ keeps the plain rule.
  s.sigma_cap = 0.9;
  EXPECT_FALSE(PlanDense(m, s).report.remediated);
  s.sigma_cap = 0.0;
  EXPECT_THROW(PlanDense(m, s), Error);
}

TEST(Isotropic, PositiveLossNeverRemediates) {
  const NoisePlan p = PlanIsotropic(12.0, 5, Settings(3, 1.0, 2.0));
  EXPECT_FALSE(p.report.remediated);
  EXPECT_NEAR(p.report.sigma, std::sqrt(12.0 / 12.0), 1e-15);
  EXPECT_TRUE(PlanIsotropic(0.0, 5, Settings(3, 1.0, 2.0)).report.remediated);
  ControllerSettings capped = Settings(3, 1.0, 2.0);
  capped.sigma_cap = 2.0;
  const NoisePlan c = PlanIsotropic(12.0, 5, capped);
  ASSERT_TRUE(c.report.remediated);
  EXPECT_NEAR(c.report.sigma, 1.0, 1e-15);
  RngStream rng(1);
  EXPECT_EQ(DrawPlanNoise(c, rng), Vector(5, 0.0));
}

TEST(Settings, ValidationAndParsing) {
  EXPECT_THROW(ValidateControllerSettings(Settings(0, 1.0, 1.0)), Error);
  EXPECT_THROW(ValidateControllerSettings(Settings(1, 0.0, 1.0)), Error);
  EXPECT_THROW(ValidateControllerSettings(Settings(1, 1.0, -1.0)), Error);
  EXPECT_EQ(ParseWorkingSigma("smallest_positive"), WorkingSigma::kSmallestPositive);
  EXPECT_THROW(ParseWorkingSigma("median"), Error);
}

TEST(StandardCovariance, IsLossSquaredGram) {
  const ModelParams p = SeededNet({{3, 2, Activation::kIdentity}}, 5);
  const ForwardTrace t = ForwardClean(SeededVector(3, 6), 1, p);
  const Matrix j = LayerJacobian(t, p, 0);
  EXPECT_EQ(StandardCovariance(t, j), Gram(j) * (t.loss * t.loss));
}

}  // namespace
}  // namespace dpulr
