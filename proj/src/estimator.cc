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

#include <cmath>
#include <string>

#include "dpulr/error.h"

namespace dpulr {
namespace {

void CheckSigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    Fail(ErrorCode::kDomain, "noise scale sigma must be positive and finite");
  }
}

double NoisyLoss(const ForwardTrace& trace, const ModelParams& params,
                 std::size_t layer, std::span<const double> z,
                 InjectMode mode) {
  return mode == InjectMode::kParams
             ? ParamNoisyLossFromTrace(trace, params, layer, z)
             : NoisyLossFromTrace(trace, params, layer, z);
}

// Maps an injection-space vector to parameter space: Jᵀu, or u itself when
// the noise sits on the parameters.
Vector ToParamSpace(const ForwardTrace& trace, std::size_t layer, Vector u,
                    InjectMode mode) {
  if (mode == InjectMode::kParams) return u;
  return LayerJacobianTransposeTimes(trace, layer, u);
}

}  // namespace

InjectMode ParseInjectMode(std::string_view name) {
  if (name == "activations") return InjectMode::kActivations;
  if (name == "params") return InjectMode::kParams;
  Fail(ErrorCode::kConfig, "unknown inject mode '" + std::string(name) + "'");
}

std::string_view InjectModeName(InjectMode mode) {
  return mode == InjectMode::kParams ? "params" : "activations";
}

std::size_t NoiseDim(const ModelParams& params, std::size_t layer,
                     InjectMode mode) {
  const LayerSpec& spec = params.spec(layer);
  return mode == InjectMode::kParams ? spec.num_params() : spec.out_dim;
}

Vector LrProxy(const Matrix& jac, std::span<const double> z, double noisy_loss,
               double sigma) {
  CheckSigma(sigma);
  if (z.size() != jac.rows()) {
    Fail(ErrorCode::kDimension, "LrProxy: noise has " +
                                    std::to_string(z.size()) +
                                    " entries, Jacobian has " +
                                    std::to_string(jac.rows()) + " rows");
  }
  const double scale = noisy_loss / (sigma * sigma);
  Vector u(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) u[i] = scale * z[i];
  return TransposeTimes(jac, u);
}

double ClipToNorm(Vector& values, double c) {
  if (!(c > 0.0)) Fail(ErrorCode::kDomain, "clip bound must be positive");
  const double norm = Norm2(values);
  if (norm > c) {
    const double s = c / norm;
    for (double& v : values) v *= s;
  }
  return norm;
}

ExampleGradient EstimateExampleGradient(const ForwardTrace& trace,
                                        const ModelParams& params,
                                        std::size_t layer, double sigma,
                                        std::size_t repeats, double c,
                                        const RngStream& rng,
                                        InjectMode mode) {
  CheckSigma(sigma);
  if (repeats < 1) Fail(ErrorCode::kDomain, "repeat count K must be >= 1");
  if (!(c > 0.0)) Fail(ErrorCode::kDomain, "clip bound must be positive");
  const std::size_t dim = NoiseDim(params, layer, mode);
  // Jᵀ is linear, so average z·L/σ² first and map once.
  Vector u(dim, 0.0);
  const double scale =
      1.0 / (sigma * sigma * static_cast<double>(repeats));
  for (std::size_t k = 0; k < repeats; ++k) {
    RngStream repeat_rng = rng.Child(k);
    const Vector z = GaussianVector(dim, sigma, repeat_rng);
    const double loss = NoisyLoss(trace, params, layer, z, mode);
    for (std::size_t i = 0; i < dim; ++i) u[i] += scale * loss * z[i];
  }
  ExampleGradient out;
  out.layer = layer;
  out.values = ToParamSpace(trace, layer, std::move(u), mode);
  out.pre_clip_norm = ClipToNorm(out.values, c);
  for (double v : out.values) {
    if (!std::isfinite(v)) {
      Fail(ErrorCode::kNumeric, "non-finite gradient estimate at layer " +
                                    std::to_string(layer));
    }
  }
  return out;
}

ExampleGradient EstimateExampleGradient(std::span<const double> x,
                                        std::size_t label,
                                        const ModelParams& params,
                                        std::size_t layer, double sigma,
                                        std::size_t repeats, double c,
                                        const RngStream& rng,
                                        InjectMode mode) {
  return EstimateExampleGradient(ForwardClean(x, label, params), params, layer,
                                 sigma, repeats, c, rng, mode);
}

Vector SingleProxy(const ForwardTrace& trace, const ModelParams& params,
                   std::size_t layer, std::span<const double> z, double sigma,
                   InjectMode mode) {
  CheckSigma(sigma);
  if (z.size() != NoiseDim(params, layer, mode)) {
    Fail(ErrorCode::kDimension, "SingleProxy: noise dimension mismatch");
  }
  const double scale = NoisyLoss(trace, params, layer, z, mode) / (sigma * sigma);
  Vector u(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) u[i] = scale * z[i];
  return ToParamSpace(trace, layer, std::move(u), mode);
}

ProxyMoments EmpiricalProxyMoments(std::span<const double> x,
                                   std::size_t label,
                                   const ModelParams& params,
                                   std::size_t layer, double sigma,
                                   std::size_t samples, const RngStream& rng,
                                   InjectMode mode) {
  if (samples < 1000) {
    Fail(ErrorCode::kDomain, "EmpiricalProxyMoments needs >= 1000 samples");
  }
  const ForwardTrace trace = ForwardClean(x, label, params);
  const std::size_t dim = NoiseDim(params, layer, mode);
  const std::size_t p = params.spec(layer).num_params();
  // Welford accumulation.
  ProxyMoments m;
  m.mean.assign(p, 0.0);
  Matrix m2(p, p);
  Vector delta(p);
  for (std::size_t s = 0; s < samples; ++s) {
    RngStream draw_rng = rng.Child(s);
    const Vector z = GaussianVector(dim, sigma, draw_rng);
    const Vector g = SingleProxy(trace, params, layer, z, sigma, mode);
    const double n = static_cast<double>(s + 1);
    for (std::size_t i = 0; i < p; ++i) {
      delta[i] = g[i] - m.mean[i];
      m.mean[i] += delta[i] / n;
    }
    for (std::size_t i = 0; i < p; ++i) {
      const double after = g[i] - m.mean[i];
      for (std::size_t j = 0; j < p; ++j) m2(i, j) += delta[j] * after;
    }
  }
  m2 *= 1.0 / static_cast<double>(samples - 1);
  // Welford's cross term is asymmetric in round-off only.
  m.covariance = (m2 + m2.Transpose()) * 0.5;
  m.samples = samples;
  return m;
}

Matrix PredictedProxyCovariance(const ForwardTrace& trace,
                                const ModelParams& params, std::size_t layer,
                                double sigma, InjectMode mode) {
  CheckSigma(sigma);
  const double s = trace.loss * trace.loss / (sigma * sigma);
  if (mode == InjectMode::kParams) {
    return Matrix::Identity(params.spec(layer).num_params()) * s;
  }
  return Gram(LayerJacobian(trace, params, layer)) * s;
}

}  // namespace dpulr
