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

// Likelihood-ratio gradient estimation with Gaussian perturbations.
//
// For noise z ~ N(0, σ²I) added at the injection point of layer l, the proxy
//   ĝ = (1/σ²)·Jᵀ·(z·L(z)),   J = ∂vˡ/∂θˡ,
// is an estimate of ∂L/∂θˡ whose bias vanishes as σ → 0.

#ifndef DPULR_ESTIMATOR_H_
#define DPULR_ESTIMATOR_H_

#include <cstddef>
#include <span>
#include <string_view>

#include "dpulr/network.h"
#include "dpulr/numkit.h"

namespace dpulr {

// kActivations perturbs the pre-activation vˡ. kParams perturbs θˡ directly,
// which makes the Jacobian the identity.
enum class InjectMode { kActivations, kParams };

InjectMode ParseInjectMode(std::string_view name);
std::string_view InjectModeName(InjectMode mode);

// Number of noise coordinates for `layer` under `mode`.
std::size_t NoiseDim(const ModelParams& params, std::size_t layer,
                     InjectMode mode);

struct ExampleGradient {
  std::size_t layer = 0;
  Vector values;
  double pre_clip_norm = 0.0;
};

// (1/σ²)·jacᵀ·(z·noisy_loss).
Vector LrProxy(const Matrix& jac, std::span<const double> z, double noisy_loss,
               double sigma);

// Scales `values` by min(1, c/‖values‖₂) in place; returns the original norm.
double ClipToNorm(Vector& values, double c);

// Averages K proxies with fresh noise per repeat (repeat k draws from
// rng.Child(k)), then clips to norm c.
ExampleGradient EstimateExampleGradient(const ForwardTrace& trace,
                                        const ModelParams& params,
                                        std::size_t layer, double sigma,
                                        std::size_t repeats, double c,
                                        const RngStream& rng,
                                        InjectMode mode = InjectMode::kActivations);

ExampleGradient EstimateExampleGradient(std::span<const double> x,
                                        std::size_t label,
                                        const ModelParams& params,
                                        std::size_t layer, double sigma,
                                        std::size_t repeats, double c,
                                        const RngStream& rng,
                                        InjectMode mode = InjectMode::kActivations);

// One unclipped proxy draw for a single noise sample, for Monte-Carlo study.
Vector SingleProxy(const ForwardTrace& trace, const ModelParams& params,
                   std::size_t layer, std::span<const double> z, double sigma,
                   InjectMode mode = InjectMode::kActivations);

struct ProxyMoments {
  Vector mean;
  Matrix covariance;  // unbiased sample covariance
  std::size_t samples = 0;
};

// Sample moments of unclipped single-draw proxies. samples >= 1000.
ProxyMoments EmpiricalProxyMoments(std::span<const double> x,
                                   std::size_t label,
                                   const ModelParams& params,
                                   std::size_t layer, double sigma,
                                   std::size_t samples, const RngStream& rng,
                                   InjectMode mode = InjectMode::kActivations);

// (L₀²/σ²)·JᵀJ, the small-σ covariance of a single proxy.
Matrix PredictedProxyCovariance(const ForwardTrace& trace,
                                const ModelParams& params, std::size_t layer,
                                double sigma,
                                InjectMode mode = InjectMode::kActivations);

}  // namespace dpulr

#endif  // DPULR_ESTIMATOR_H_
