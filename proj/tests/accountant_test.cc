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

#include "dpulr/accountant.h"

#include <gtest/gtest.h>

#include <cmath>

#include "dpulr/error.h"
#include "oracles/binomial_oracle.h"
#include "oracles/rdp_oracle.h"
#include "test_util.h"

namespace dpulr {
namespace {

using testing::RelDiff;

SrgmParams Params(double q, double sigma0, std::uint64_t n_b, std::uint64_t n_bar) {
  SrgmParams p;
  p.q = q;
  p.sigma0 = sigma0;
  p.n_b = n_b;
  p.n_bar = n_bar;
  return p;
}

TEST(RdpToDp, PlugIns) {
  EXPECT_NEAR(RdpToDp(2.0, 0.0, std::exp(-1.0)), 1.0, 1e-15);
  EXPECT_NEAR(RdpToDp(11.0, 0.5, 1e-5), 0.5 + std::log(1e5) / 10.0, 1e-15);
  EXPECT_NEAR(RdpToDp(11.0, 0.5, 1e-5), 1.6513, 1e-4);
  EXPECT_NEAR(RdpToDp(3.0, 0.25, 1.0 - 1e-12), 0.25, 1e-11);
  EXPECT_THROW(RdpToDp(1.0, 0.1, 0.1), Error);
  EXPECT_THROW(RdpToDp(2.0, 0.1, 0.0), Error);
}

TEST(Compose, Multiplies) {
  EXPECT_EQ(Compose(0.125, 1), 0.125);
  EXPECT_EQ(Compose(0.125, 8), 1.0);
  EXPECT_THROW(Compose(0.1, 0), Error);
}

TEST(AlphaValid, RegimeChecks) {
  const SrgmParams ok = Params(0.01, 4.0, 50, 10000);
  const double a = std::log1p(1.0 / (0.01 * 0.1));
  EXPECT_NEAR(a, 6.909, 1e-3);
  EXPECT_GE(0.5 * 16.0 * a - 2.0 * std::log(4.0), 1.1);
  const double second = (0.5 * 16.0 * a * a - std::log(5.0) - 2.0 * std::log(4.0)) /
                        (a + std::log(0.011) + 1.0 / 32.0);
  EXPECT_EQ(AlphaValid(1.1, ok), second >= 1.1);
  EXPECT_FALSE(AlphaValid(1.1, Params(0.3, 4.0, 1, 100)));
  EXPECT_FALSE(AlphaValid(1.1, Params(0.01, 1.0, 50, 10000)));
  EXPECT_FALSE(AlphaValid(1.1, Params(0.01, 4.0, 200, 10000)));
  EXPECT_FALSE(AlphaValid(1.0, ok));
  EXPECT_TRUE(InProvenRegime(ok));
}

TEST(StepRdp, MagnitudesAtMnistScale) {
  const SrgmParams p = Params(0.01, 4.0, 50, 10000);
  const StepRdp t = SrgmStepTerms(1.1, p);
  EXPECT_LT(t.impairment, 1e-10);
  EXPECT_GT(t.main, 1e-6);
  EXPECT_LT(RelDiff(t.impairment, oracle::ImpairmentBigFloat(0.01, 50, 10000)), 1e-10);
  EXPECT_LT(ImpairmentRatio(p, 1.1), 1e-4);
}

TEST(StepRdp, SmallCaseMatchesRationalOracle) {
  const SrgmParams p = Params(0.1, 4.0, 5, 100);
  const StepRdp t = SrgmStepTerms(2.0, p);
  EXPECT_LT(RelDiff(t.impairment, oracle::ImpairmentRational(0.1, 5, 100)), 1e-10);
  EXPECT_LT(RelDiff(t.impairment, oracle::ImpairmentExactInteger(0.1, 5, 100)), 1e-10);
  EXPECT_LT(RelDiff(t.main, static_cast<double>(oracle::SgmStepBound(0.1L, 4.0L, 2.0L))),
            1e-15);
  EXPECT_DOUBLE_EQ(SrgmStepRdp(2.0, p), t.gamma());
}

TEST(StepRdp, FullSamplingHasNoImpairment) {
  const SrgmParams p = Params(1.0, 4.0, 5, 100);
  EXPECT_EQ(ImpairmentTerm(p), 0.0);
  EXPECT_EQ(ImpairmentRatio(p, 2.0), 0.0);
}

TEST(StepRdp, SgmMechanismDropsImpairment) {
  const SrgmParams p = Params(0.1, 4.0, 5, 100);
  const StepRdp t = SrgmStepTerms(2.0, p, Mechanism::kSgm);
  EXPECT_EQ(t.impairment, 0.0);
  EXPECT_EQ(t.main, MainTerm(2.0, p));
}

TEST(StepRdp, StrictModeRejectsInvalidAlpha) {
  const SrgmParams p = Params(0.01, 1.0, 50, 10000);
  EXPECT_NO_THROW(SrgmStepRdp(2.0, p));
  try {
    SrgmStepRdp(2.0, p, true);
    FAIL() << "expected a validity error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kValidity);
  }
}

TEST(Impairment, ShrinksWithDatasetSize) {
  double prev = std::numeric_limits<double>::infinity();
  for (std::uint64_t n : {1000u, 2000u, 5000u, 10000u, 50000u, 100000u}) {
    const double v = ImpairmentTerm(Params(0.01, 4.0, 8, n));
    EXPECT_LT(v, prev) << "n_bar=" << n;
    prev = v;
  }
}

TEST(BestEpsilon, MatchesFormulaOracle) {
  const SrgmParams p = Params(0.01, 4.0, 50, 10000);
  const EpsilonResult r = BestEpsilon(p, 2000, 1e-5);
  const long double extra = oracle::ImpairmentBigFloat(0.01, 50, 10000);
  const oracle::OracleEpsilon o =
      oracle::BestEpsilon(0.01L, 4.0L, 2000, 1e-5L, extra, oracle::AlphaGrid());
  EXPECT_LT(RelDiff(r.epsilon, static_cast<double>(o.epsilon)), 1e-12);
  EXPECT_EQ(r.alpha, static_cast<double>(o.alpha));
  EXPECT_NEAR(r.gamma, 2000.0 * (r.impairment_term + r.main_term), 1e-12 * r.gamma);
}

TEST(BestEpsilon, ImpairmentFreeMatchesSgmReference) {
  // N_B = 1 with a huge dataset leaves a negligible impairment; the result
  // must match a standalone SGM accountant using the same per-step bound.
  const SrgmParams p = Params(0.01, 4.0, 1, 100000000);
  const EpsilonResult r = BestEpsilon(p, 1000, 1e-5);
  EXPECT_LT(r.impairment_term, 1e-300);
  const oracle::OracleEpsilon o =
      oracle::BestEpsilon(0.01L, 4.0L, 1000, 1e-5L, 0.0L, oracle::AlphaGrid());
  EXPECT_LT(RelDiff(r.epsilon, static_cast<double>(o.epsilon)), 0.01);
  const EpsilonResult sgm = BestEpsilon(p, 1000, 1e-5, false, Mechanism::kSgm);
  EXPECT_EQ(sgm.epsilon, r.epsilon);
}

TEST(ExactSgm, BoundDominatesExact) {
  for (int a : {2, 5, 10, 30}) {
    EXPECT_LE(oracle::ExactSgmRdp(0.01L, 4.0L, a), oracle::SgmStepBound(0.01L, 4.0L, a));
  }
}

TEST(BestEpsilon, Monotonicity) {
  const SrgmParams p = Params(0.01, 4.0, 50, 10000);
  EXPECT_LT(BestEpsilon(p, 1000, 1e-5).epsilon, BestEpsilon(p, 2000, 1e-5).epsilon);
  SrgmParams louder = p;
  louder.sigma0 = 8.0;
  EXPECT_LT(SrgmStepRdp(2.0, louder), SrgmStepRdp(2.0, p));
}

TEST(BestEpsilon, StrictModeNeedsAValidAlpha) {
  EXPECT_THROW(BestEpsilon(Params(0.01, 1.0, 50, 10000), 100, 1e-5, true), Error);
  const EpsilonResult r = BestEpsilon(Params(0.01, 4.0, 50, 10000), 100, 1e-5, true);
  EXPECT_TRUE(r.regime_valid);
}

TEST(Ledger, AdditiveAcrossSteps) {
  const SrgmParams p = Params(0.05, 4.0, 20, 1000);
  RdpLedger one_by_one;
  for (int i = 0; i < 300; ++i) one_by_one.AddSteps(p, Mechanism::kSrgm);
  RdpLedger bulk;
  bulk.AddSteps(p, Mechanism::kSrgm, 300);
  EXPECT_EQ(one_by_one.steps_accumulated(), 300u);
  const auto a = one_by_one.Gammas();
  const auto b = bulk.Gammas();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(RelDiff(a[i], b[i]), 1e-12);
}

TEST(Ledger, GammaNondecreasing) {
  const SrgmParams p = Params(0.05, 4.0, 20, 1000);
  RdpLedger l;
  std::vector<double> prev(l.alpha_grid().size(), 0.0);
  for (int i = 0; i < 5; ++i) {
    l.AddSteps(p, Mechanism::kSrgm, 10);
    const auto g = l.Gammas();
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_GE(g[k], prev[k]);
    prev = g;
  }
  EXPECT_THROW(RdpLedger().Epsilon(1e-5), Error);
}

TEST(AlphaGrid, Shape) {
  const auto g = DefaultAlphaGrid();
  ASSERT_EQ(g.size(), 99u + 255u);
  EXPECT_DOUBLE_EQ(g.front(), 1.01);
  EXPECT_DOUBLE_EQ(g[98], 1.99);
  EXPECT_EQ(g[99], 2.0);
  EXPECT_EQ(g.back(), 256.0);
}

}  // namespace
}  // namespace dpulr
