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

#include "dpulr/network.h"

#include <gtest/gtest.h>

#include <cmath>

#include "dpulr/error.h"
#include "test_util.h"

namespace dpulr {
namespace {

using testing::SeededNet;
using testing::SeededVector;
using testing::ToLong;
using testing::ToReference;

const std::vector<LayerSpec> kThreeLayer = {
    {5, 6, Activation::kGelu},
    {6, 4, Activation::kRelu},
    {4, 3, Activation::kIdentity}};

TEST(Architecture, Validation) {
  EXPECT_NO_THROW(ValidateArchitecture(kThreeLayer));
  const std::vector<LayerSpec> bad_chain = {{3, 4, Activation::kGelu},
                                            {5, 2, Activation::kIdentity}};
  EXPECT_THROW(ValidateArchitecture(bad_chain), Error);
  const std::vector<LayerSpec> bad_last = {{3, 2, Activation::kGelu}};
  EXPECT_THROW(ValidateArchitecture(bad_last), Error);
  const std::vector<LayerSpec> empty;
  EXPECT_THROW(ValidateArchitecture(empty), Error);
}

TEST(Activation, ParseAndValues) {
  EXPECT_EQ(ParseActivation("gelu"), Activation::kGelu);
  EXPECT_THROW(ParseActivation("tanh"), Error);
  EXPECT_EQ(Activate(Activation::kRelu, -2.0), 0.0);
  EXPECT_NEAR(Activate(Activation::kGelu, 1.0), 0.8413447460685429, 1e-15);
  const double h = 1e-6;
  for (double v : {-1.3, 0.2, 2.5}) {
    const double fd = (Activate(Activation::kGelu, v + h) -
                       Activate(Activation::kGelu, v - h)) / (2 * h);
    EXPECT_NEAR(ActivateDerivative(Activation::kGelu, v), fd, 1e-8);
  }
}

TEST(RandomInit, UniformBound) {
  const ModelParams p = SeededNet(kThreeLayer, 3);
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.spec(l).in_dim));
    for (double w : p.layer(l).weight.data()) EXPECT_LE(std::abs(w), bound);
    for (double b : p.layer(l).bias) EXPECT_LE(std::abs(b), bound);
  }
  EXPECT_EQ(p.num_params(), 36u + 28u + 15u);
}

TEST(FlattenAssign, RoundTrip) {
  ModelParams p = SeededNet(kThreeLayer, 4);
  const Vector flat = p.Flatten(1);
  ASSERT_EQ(flat.size(), 28u);
  EXPECT_EQ(flat[2 * 6 + 3], p.layer(1).weight(2, 3));
  EXPECT_EQ(flat[24 + 1], p.layer(1).bias[1]);
  ModelParams q(kThreeLayer);
  q.Assign(1, flat);
  EXPECT_EQ(q.Flatten(1), flat);
  EXPECT_THROW(q.Assign(1, Vector(3)), Error);
}

TEST(CrossEntropy, HandCases) {
  // 1-layer identity net, W = I, b = 0, x = (1, 0): logits (1, 0).
  ModelParams p({{2, 2, Activation::kIdentity}});
  p.layer(0).weight = Matrix::Identity(2);
  const Vector x = {1.0, 0.0};
  EXPECT_NEAR(ForwardClean(x, 0, p).loss, std::log(1.0 + std::exp(-1.0)), 1e-15);
  ModelParams zero({{4, 5, Activation::kIdentity}});
  EXPECT_NEAR(ForwardClean(SeededVector(4, 1), 2, zero).loss, std::log(5.0), 1e-15);
  EXPECT_THROW(CrossEntropy(Vector{1.0, 2.0}, 2), Error);
}

TEST(Forward, MatchesReference) {
  const ModelParams p = SeededNet(kThreeLayer, 5);
  const auto ref = ToReference(p);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vector x = SeededVector(5, 100 + s);
    const ForwardTrace t = ForwardClean(x, s % 3, p);
    EXPECT_NEAR(t.loss, static_cast<double>(ref.Loss(ToLong(x), s % 3)), 1e-12);
    const auto logits = ref.Logits(ToLong(x));
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(t.logits[k], static_cast<double>(logits[k]), 1e-12);
    }
  }
}

TEST(NoisyForward, ZeroNoiseIsClean) {
  const ModelParams p = SeededNet(kThreeLayer, 6);
  const Vector x = SeededVector(5, 7);
  const ForwardTrace t = ForwardClean(x, 1, p);
  for (std::size_t l = 0; l < 3; ++l) {
    const Vector z(p.spec(l).out_dim, 0.0);
    EXPECT_EQ(ForwardNoisy(x, 1, p, l, z), t.loss);
    EXPECT_EQ(NoisyLossFromTrace(t, p, l, z), t.loss);
  }
  const Vector pz(p.spec(2).num_params(), 0.0);
  EXPECT_EQ(ParamNoisyLossFromTrace(t, p, 2, pz), t.loss);
}

TEST(NoisyForward, LogitOffsetHandCase) {
  ModelParams p({{3, 2, Activation::kIdentity}});
  const Vector z = {1.0, 0.0};
  EXPECT_NEAR(ForwardNoisy(Vector{0.3, -1.0, 2.0}, 0, p, 0, z),
              std::log(1.0 + std::exp(-1.0)), 1e-15);
}

TEST(NoisyForward, MatchesReference) {
  const ModelParams p = SeededNet(kThreeLayer, 8);
  const auto ref = ToReference(p);
  const Vector x = SeededVector(5, 9);
  for (std::size_t l = 0; l < 3; ++l) {
    const Vector z = SeededVector(p.spec(l).out_dim, 20 + l, 0.3);
    EXPECT_NEAR(ForwardNoisy(x, 2, p, l, z),
                static_cast<double>(ref.Loss(ToLong(x), 2, l, ToLong(z))), 1e-12);
  }
  EXPECT_THROW(ForwardNoisy(x, 2, p, 0, Vector(2)), Error);
  EXPECT_THROW(ForwardNoisy(x, 2, p, 3, Vector(3)), Error);
}

TEST(ParamNoise, EqualsPerturbedParameters) {
  const ModelParams p = SeededNet(kThreeLayer, 10);
  const Vector x = SeededVector(5, 11);
  const ForwardTrace t = ForwardClean(x, 0, p);
  const Vector z = SeededVector(p.spec(1).num_params(), 12, 0.1);
  ModelParams shifted = p;
  shifted.AddToLayer(1, z);
  EXPECT_NEAR(ParamNoisyLossFromTrace(t, p, 1, z), ForwardClean(x, 0, shifted).loss,
              1e-13);
}

TEST(Jacobian, OneByOneLayer) {
  ModelParams p({{1, 1, Activation::kIdentity}, {1, 2, Activation::kIdentity}});
  const ForwardTrace t = ForwardClean(Vector{2.5}, 0, p);
  const Matrix j = LayerJacobian(t, p, 0);
  EXPECT_EQ(j, (Matrix{{2.5, 1.0}}));
}

TEST(Jacobian, GramIsBlockDiagonalWithIdenticalBlocks) {
  ModelParams p({{2, 2, Activation::kIdentity}});
  const double a = 0.7;
  const double b = -1.9;
  const ForwardTrace t = ForwardClean(Vector{a, b}, 0, p);
  const Matrix g = Gram(LayerJacobian(t, p, 0));
  // Weight indices: row m occupies m·2 .. m·2+1.
  const Matrix block = {{a * a, a * b}, {a * b, b * b}};
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_DOUBLE_EQ(g(m * 2 + i, m * 2 + k), block(i, k));
        EXPECT_EQ(g(m * 2 + i, (1 - m) * 2 + k), 0.0);
      }
    }
  }
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const ModelParams p = SeededNet(kThreeLayer, 13);
  const auto ref = ToReference(p);
  const Vector x = SeededVector(5, 14);
  const ForwardTrace t = ForwardClean(x, 1, p);
  for (std::size_t l = 0; l < 3; ++l) {
    const Matrix j = LayerJacobian(t, p, l);
    const auto fd = ref.FiniteDifferenceJacobian(ToLong(x), l);
    ASSERT_EQ(j.rows(), fd.size());
    ASSERT_EQ(j.cols(), fd[0].size());
    for (std::size_t r = 0; r < j.rows(); ++r) {
      for (std::size_t c = 0; c < j.cols(); ++c) {
        EXPECT_NEAR(j(r, c), static_cast<double>(fd[r][c]), 1e-6);
      }
    }
    // The structured product agrees with the dense one.
    const Vector u = SeededVector(p.spec(l).out_dim, 40 + l);
    const Vector dense = TransposeTimes(j, u);
    const Vector fast = LayerJacobianTransposeTimes(t, l, u);
    for (std::size_t i = 0; i < dense.size(); ++i) EXPECT_NEAR(dense[i], fast[i], 1e-14);
  }
}

TEST(Backprop, ZeroInputZeroBiasGivesZeroWeightGradient) {
  ModelParams p = SeededNet({{3, 4, Activation::kIdentity}}, 15);
  for (double& b : p.layer(0).bias) b = 0.0;
  const auto g = BackpropGradients(Vector(3, 0.0), 1, p);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(g[0][i], 0.0);
}

TEST(Backprop, SoftmaxRegressionTextbookForm) {
  const ModelParams p = SeededNet({{3, 4, Activation::kIdentity}}, 16);
  const Vector x = {0.5, -1.0, 2.0};
  const ForwardTrace t = ForwardClean(x, 2, p);
  double mx = t.logits[0];
  for (double v : t.logits) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : t.logits) z += std::exp(v - mx);
  const auto g = BackpropGradients(x, 2, p);
  for (std::size_t m = 0; m < 4; ++m) {
    const double r = std::exp(t.logits[m] - mx) / z - (m == 2 ? 1.0 : 0.0);
    for (std::size_t n = 0; n < 3; ++n) EXPECT_NEAR(g[0][m * 3 + n], r * x[n], 1e-15);
    EXPECT_NEAR(g[0][12 + m], r, 1e-15);
  }
}

TEST(Backprop, MatchesFiniteDifferences) {
  const ModelParams p = SeededNet(kThreeLayer, 17);
  const auto ref = ToReference(p);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Vector x = SeededVector(5, 50 + s);
    const auto g = BackpropGradients(x, s, p);
    const auto trace_g = BackpropFromTrace(ForwardClean(x, s, p), p);
    for (std::size_t l = 0; l < 3; ++l) {
      const auto fd = ref.FiniteDifferenceGradient(ToLong(x), s, l);
      ASSERT_EQ(g[l].size(), fd.size());
      EXPECT_EQ(g[l], trace_g[l]);
      for (std::size_t i = 0; i < fd.size(); ++i) {
        EXPECT_NEAR(g[l][i], static_cast<double>(fd[i]), 1e-7);
      }
    }
  }
}

TEST(InjectionPoint, ChainsToParameterGradient) {
  const ModelParams p = SeededNet(kThreeLayer, 18);
  const Vector x = SeededVector(5, 19);
  const ForwardTrace t = ForwardClean(x, 1, p);
  const auto g = BackpropFromTrace(t, p);
  for (std::size_t l = 0; l < 3; ++l) {
    const Vector dv = InjectionPointGradient(t, p, l);
    const Vector viaj = LayerJacobianTransposeTimes(t, l, dv);
    for (std::size_t i = 0; i < viaj.size(); ++i) EXPECT_NEAR(viaj[i], g[l][i], 1e-14);
  }
}

TEST(Predict, ArgmaxOfLogits) {
  ModelParams p({{2, 3, Activation::kIdentity}});
  p.layer(0).bias = {0.1, 0.5, -0.2};
  EXPECT_EQ(Predict(Vector{0.0, 0.0}, p), 1u);
}

}  // namespace
}  // namespace dpulr
