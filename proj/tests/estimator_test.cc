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

#include "dpulr/estimator.h"

#include <gtest/gtest.h>

#include <cmath>

#include "dpulr/error.h"
#include "test_util.h"

namespace dpulr {
namespace {

using testing::SeededNet;
using testing::SeededVector;

const std::vector<LayerSpec> kNet = {{3, 4, Activation::kGelu},
                                     {4, 2, Activation::kIdentity}};

TEST(LrProxy, HandCase) {
  // J = [[1, 2]], z = (0.5), L = 3, σ = 0.5: 3·0.5/0.25 = 6 → (6, 12).
  const Matrix j = {{1.0, 2.0}};
  EXPECT_EQ(LrProxy(j, Vector{0.5}, 3.0, 0.5), (Vector{6.0, 12.0}));
  EXPECT_THROW(LrProxy(j, Vector{0.5, 1.0}, 3.0, 0.5), Error);
  EXPECT_THROW(LrProxy(j, Vector{0.5}, 3.0, 0.0), Error);
}

TEST(ClipToNorm, Arithmetic) {
  Vector v = {3.0, 4.0};
  EXPECT_EQ(ClipToNorm(v, 1.0), 5.0);
  EXPECT_NEAR(v[0], 0.6, 1e-15);
  EXPECT_NEAR(v[1], 0.8, 1e-15);
  Vector small = {0.1, 0.2};
  ClipToNorm(small, 1.0);
  EXPECT_EQ(small, (Vector{0.1, 0.2}));
  Vector zero = {0.0, 0.0};
  EXPECT_EQ(ClipToNorm(zero, 1.0), 0.0);
  EXPECT_EQ(zero, (Vector{0.0, 0.0}));
  EXPECT_THROW(ClipToNorm(v, 0.0), Error);
}

TEST(InjectMode, ParseAndDim) {
  EXPECT_EQ(ParseInjectMode("params"), InjectMode::kParams);
  EXPECT_EQ(InjectModeName(InjectMode::kActivations), "activations");
  EXPECT_THROW(ParseInjectMode("weights"), Error);
  const ModelParams p(kNet);
  EXPECT_EQ(NoiseDim(p, 0, InjectMode::kActivations), 4u);
  EXPECT_EQ(NoiseDim(p, 0, InjectMode::kParams), 16u);
}

TEST(EstimateExampleGradient, SingleRepeatUnclippedEqualsSingleProxy) {
  const ModelParams p = SeededNet(kNet, 1);
  const Vector x = SeededVector(3, 2);
  const ForwardTrace t = ForwardClean(x, 1, p);
  const RngStream rng(3);
  for (InjectMode mode : {InjectMode::kActivations, InjectMode::kParams}) {
    for (std::size_t l = 0; l < 2; ++l) {
      const ExampleGradient g =
          EstimateExampleGradient(t, p, l, 0.2, 1, 1e18, rng, mode);
      RngStream draw = rng.Child(0);
      const Vector z = GaussianVector(NoiseDim(p, l, mode), 0.2, draw);
      const Vector want = SingleProxy(t, p, l, z, 0.2, mode);
      ASSERT_EQ(g.values.size(), want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_NEAR(g.values[i], want[i], 1e-12 * (1.0 + std::abs(want[i])));
      }
      EXPECT_NEAR(g.pre_clip_norm, Norm2(want), 1e-10 * (1.0 + Norm2(want)));
    }
  }
}

TEST(EstimateExampleGradient, AveragesRepeatsThenClips) {
  const ModelParams p = SeededNet(kNet, 4);
  const Vector x = SeededVector(3, 5);
  const ForwardTrace t = ForwardClean(x, 0, p);
  const RngStream rng(6);
  const std::size_t k_rep = 7;
  Vector mean(p.spec(0).num_params(), 0.0);
  for (std::size_t k = 0; k < k_rep; ++k) {
    RngStream draw = rng.Child(k);
    const Vector z = GaussianVector(4, 0.5, draw);
    const Vector g = SingleProxy(t, p, 0, z, 0.5);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += g[i] / k_rep;
  }
  const double norm = Norm2(mean);
  const double c = 0.25 * norm;
  const ExampleGradient g = EstimateExampleGradient(t, p, 0, 0.5, k_rep, c, rng);
  EXPECT_NEAR(g.pre_clip_norm, norm, 1e-12 * norm);
  EXPECT_NEAR(Norm2(g.values), c, 1e-12 * c);
  for (std::size_t i = 0; i < mean.size(); ++i) {
    EXPECT_NEAR(g.values[i], 0.25 * mean[i], 1e-12 * (1.0 + std::abs(mean[i])));
  }
}

TEST(EstimateExampleGradient, RejectsBadArguments) {
  const ModelParams p = SeededNet(kNet, 7);
  const Vector x = SeededVector(3, 8);
  const RngStream rng(9);
  EXPECT_THROW(EstimateExampleGradient(x, 0, p, 0, 0.0, 1, 1.0, rng), Error);
  EXPECT_THROW(EstimateExampleGradient(x, 0, p, 0, 1.0, 0, 1.0, rng), Error);
  EXPECT_THROW(EstimateExampleGradient(x, 0, p, 0, 1.0, 1, -1.0, rng), Error);
}

TEST(EstimateExampleGradient, SmallSigmaMeanTracksBackprop) {
  const ModelParams p = SeededNet(kNet, 10);
  const Vector x = SeededVector(3, 11);
  const auto grad = BackpropGradients(x, 1, p);
  const ProxyMoments m = EmpiricalProxyMoments(x, 1, p, 1, 1e-3, 20000, RngStream(12));
  // Per coordinate within 5 standard errors.
  for (std::size_t i = 0; i < grad[1].size(); ++i) {
    const double se = std::sqrt(m.covariance(i, i) / 20000.0);
    EXPECT_LT(std::abs(m.mean[i] - grad[1][i]), 5.0 * se) << "coord " << i;
  }
}

TEST(PredictedCovariance, VirtualLinearLayerIsScaledGram) {
  const ModelParams p = SeededNet(kNet, 13);
  const ForwardTrace t = ForwardClean(SeededVector(3, 14), 0, p);
  const Matrix c = PredictedProxyCovariance(t, p, 1, 0.5);
  const Matrix j = LayerJacobian(t, p, 1);
  const Matrix want = Gram(j) * (t.loss * t.loss / 0.25);
  EXPECT_EQ(c, want);
  const Matrix iso = PredictedProxyCovariance(t, p, 1, 0.5, InjectMode::kParams);
  EXPECT_NEAR(iso(3, 3), t.loss * t.loss / 0.25, 1e-14);
  EXPECT_EQ(iso(3, 2), 0.0);
}

TEST(EmpiricalMoments, NeedsEnoughSamples) {
  const ModelParams p = SeededNet(kNet, 15);
  EXPECT_THROW(EmpiricalProxyMoments(SeededVector(3, 1), 0, p, 0, 1.0, 999,
                                     RngStream(1)),
               Error);
}

}  // namespace
}  // namespace dpulr
