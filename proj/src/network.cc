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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dpulr/error.h"

namespace dpulr {
namespace {

void CheckLayerIndex(const ModelParams& params, std::size_t layer) {
  if (layer >= params.num_layers()) {
    Fail(ErrorCode::kIndex, "layer index " + std::to_string(layer) +
                                " out of range (" +
                                std::to_string(params.num_layers()) +
                                " layers)");
  }
}

void CheckInput(std::span<const double> x, std::size_t label,
                const ModelParams& params) {
  if (params.num_layers() == 0) Fail(ErrorCode::kDimension, "empty model");
  if (x.size() != params.input_dim()) {
    Fail(ErrorCode::kDimension, "input has " + std::to_string(x.size()) +
                                    " features, model expects " +
                                    std::to_string(params.input_dim()));
  }
  if (label >= params.output_dim()) {
    Fail(ErrorCode::kDomain, "label " + std::to_string(label) +
                                 " out of range for " +
                                 std::to_string(params.output_dim()) +
                                 " classes");
  }
}

// v = W·x + b.
Vector Affine(const LayerParams& p, std::span<const double> x) {
  Vector v(p.weight.rows());
  for (std::size_t m = 0; m < v.size(); ++m) {
    v[m] = Dot(p.weight.row(m), x) + p.bias[m];
  }
  return v;
}

// Runs layers [first, L) starting from the pre-activation `v` of layer
// first−1 passed through that layer's activation.
double LossFrom(const ModelParams& params, std::size_t layer, Vector v,
                std::size_t label) {
  const std::size_t last = params.num_layers() - 1;
  for (std::size_t l = layer; l < last; ++l) {
    const Activation act = params.spec(l).activation;
    for (double& e : v) e = Activate(act, e);
    v = Affine(params.layer(l + 1), v);
  }
  return CrossEntropy(v, label);
}

}  // namespace

Activation ParseActivation(std::string_view name) {
  if (name == "gelu") return Activation::kGelu;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  Fail(ErrorCode::kConfig, "unknown activation '" + std::string(name) + "'");
}

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kGelu:
      return "gelu";
    case Activation::kRelu:
      return "relu";
    case Activation::kIdentity:
      return "identity";
  }
  return "identity";
}

double Activate(Activation a, double v) {
  switch (a) {
    case Activation::kGelu:
      return 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
    case Activation::kRelu:
      return v > 0.0 ? v : 0.0;
    case Activation::kIdentity:
      return v;
  }
  return v;
}

double ActivateDerivative(Activation a, double v) {
  switch (a) {
    case Activation::kGelu: {
      const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
      const double pdf =
          std::exp(-0.5 * v * v) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
      return cdf + v * pdf;
    }
    case Activation::kRelu:
      return v > 0.0 ? 1.0 : 0.0;
    case Activation::kIdentity:
      return 1.0;
  }
  return 1.0;
}

void ValidateArchitecture(std::span<const LayerSpec> layers) {
  if (layers.empty()) Fail(ErrorCode::kConfig, "architecture has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].in_dim == 0 || layers[l].out_dim == 0) {
      Fail(ErrorCode::kConfig,
           "layer " + std::to_string(l) + " has a zero dimension");
    }
    if (l > 0 && layers[l].in_dim != layers[l - 1].out_dim) {
      Fail(ErrorCode::kConfig, "layer " + std::to_string(l) + " in_dim " +
                                   std::to_string(layers[l].in_dim) +
                                   " does not match previous out_dim " +
                                   std::to_string(layers[l - 1].out_dim));
    }
  }
  if (layers.back().activation != Activation::kIdentity) {
    Fail(ErrorCode::kConfig,
         "final layer must use the identity activation (the loss applies "
         "softmax)");
  }
}

// ---------------------------------------------------------------------------
// ModelParams

ModelParams::ModelParams(std::vector<LayerSpec> specs)
    : specs_(std::move(specs)) {
  ValidateArchitecture(specs_);
  layers_.reserve(specs_.size());
  for (const LayerSpec& s : specs_) {
    layers_.push_back({Matrix(s.out_dim, s.in_dim), Vector(s.out_dim, 0.0)});
  }
}

ModelParams ModelParams::RandomInit(std::vector<LayerSpec> specs,
                                    RngStream& rng) {
  ModelParams params(std::move(specs));
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(params.spec(l).in_dim));
    LayerParams& p = params.layer(l);
    for (double& w : p.weight.data()) w = bound * (2.0 * rng.NextUniform() - 1.0);
    for (double& b : p.bias) b = bound * (2.0 * rng.NextUniform() - 1.0);
  }
  return params;
}

std::size_t ModelParams::num_params() const {
  std::size_t total = 0;
  for (const LayerSpec& s : specs_) total += s.num_params();
  return total;
}

Vector ModelParams::Flatten(std::size_t l) const {
  const LayerParams& p = layers_.at(l);
  Vector flat(p.weight.data());
  flat.insert(flat.end(), p.bias.begin(), p.bias.end());
  return flat;
}

void ModelParams::Assign(std::size_t l, std::span<const double> flat) {
  LayerParams& p = layers_.at(l);
  const std::size_t nw = p.weight.data().size();
  if (flat.size() != nw + p.bias.size()) {
    Fail(ErrorCode::kDimension, "Assign: expected " +
                                    std::to_string(nw + p.bias.size()) +
                                    " values, got " +
                                    std::to_string(flat.size()));
  }
  std::copy(flat.begin(), flat.begin() + nw, p.weight.data().begin());
  std::copy(flat.begin() + nw, flat.end(), p.bias.begin());
}

void ModelParams::AddToLayer(std::size_t l, std::span<const double> delta) {
  LayerParams& p = layers_.at(l);
  const std::size_t nw = p.weight.data().size();
  if (delta.size() != nw + p.bias.size()) {
    Fail(ErrorCode::kDimension, "AddToLayer: size mismatch");
  }
  for (std::size_t i = 0; i < nw; ++i) p.weight.data()[i] += delta[i];
  for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] += delta[nw + i];
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (a.specs_ != b.specs_) return false;
  for (std::size_t l = 0; l < a.layers_.size(); ++l) {
    if (!(a.layers_[l].weight == b.layers_[l].weight) ||
        a.layers_[l].bias != b.layers_[l].bias) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Forward passes

double CrossEntropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    Fail(ErrorCode::kDomain, "CrossEntropy: label out of range");
  }
  return LogSumExp(logits) - logits[label];
}

ForwardTrace ForwardClean(std::span<const double> x, std::size_t label,
                          const ModelParams& params) {
  CheckInput(x, label, params);
  ForwardTrace trace;
  trace.label = label;
  trace.inputs.reserve(params.num_layers());
  trace.pre_activations.reserve(params.num_layers());
  Vector current(x.begin(), x.end());
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    Vector v = Affine(params.layer(l), current);
    trace.inputs.push_back(std::move(current));
    current = v;
    const Activation act = params.spec(l).activation;
    for (double& e : current) e = Activate(act, e);
    trace.pre_activations.push_back(std::move(v));
  }
  trace.logits = trace.pre_activations.back();
  trace.loss = CrossEntropy(trace.logits, label);
  if (!std::isfinite(trace.loss)) {
    Fail(ErrorCode::kNumeric, "ForwardClean: non-finite loss");
  }
  return trace;
}

double NoisyLossFromTrace(const ForwardTrace& trace, const ModelParams& params,
                          std::size_t layer, std::span<const double> z) {
  CheckLayerIndex(params, layer);
  const Vector& v = trace.pre_activations.at(layer);
  if (z.size() != v.size()) {
    Fail(ErrorCode::kDimension, "noise has " + std::to_string(z.size()) +
                                    " entries, layer " + std::to_string(layer) +
                                    " outputs " + std::to_string(v.size()));
  }
  Vector noisy(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) noisy[i] = v[i] + z[i];
  return LossFrom(params, layer, std::move(noisy), trace.label);
}

double ForwardNoisy(std::span<const double> x, std::size_t label,
                    const ModelParams& params, std::size_t layer,
                    std::span<const double> z) {
  return NoisyLossFromTrace(ForwardClean(x, label, params), params, layer, z);
}

double ParamNoisyLossFromTrace(const ForwardTrace& trace,
                               const ModelParams& params, std::size_t layer,
                               std::span<const double> z) {
  CheckLayerIndex(params, layer);
  const LayerSpec& spec = params.spec(layer);
  if (z.size() != spec.num_params()) {
    Fail(ErrorCode::kDimension, "parameter noise has " +
                                    std::to_string(z.size()) + " entries, layer " +
                                    std::to_string(layer) + " has " +
                                    std::to_string(spec.num_params()));
  }
  const LayerParams& p = params.layer(layer);
  const Vector& x = trace.inputs.at(layer);
  const std::size_t nw = spec.out_dim * spec.in_dim;
  Vector v(spec.out_dim);
  for (std::size_t m = 0; m < spec.out_dim; ++m) {
    double s = 0.0;
    auto w = p.weight.row(m);
    for (std::size_t n = 0; n < spec.in_dim; ++n) {
      s += (w[n] + z[m * spec.in_dim + n]) * x[n];
    }
    v[m] = s + (p.bias[m] + z[nw + m]);
  }
  return LossFrom(params, layer, std::move(v), trace.label);
}

// ---------------------------------------------------------------------------
// Derivatives

Matrix LayerJacobian(const ForwardTrace& trace, const ModelParams& params,
                     std::size_t layer) {
  CheckLayerIndex(params, layer);
  const LayerSpec& spec = params.spec(layer);
  const Vector& x = trace.inputs.at(layer);
  Matrix jac(spec.out_dim, spec.num_params());
  const std::size_t nw = spec.out_dim * spec.in_dim;
  for (std::size_t m = 0; m < spec.out_dim; ++m) {
    for (std::size_t n = 0; n < spec.in_dim; ++n) {
      jac(m, m * spec.in_dim + n) = x[n];
    }
    jac(m, nw + m) = 1.0;
  }
  return jac;
}

Vector LayerJacobianTransposeTimes(const ForwardTrace& trace,
                                   std::size_t layer,
                                   std::span<const double> u) {
  const Vector& x = trace.inputs.at(layer);
  const std::size_t out = trace.pre_activations.at(layer).size();
  if (u.size() != out) {
    Fail(ErrorCode::kDimension, "Jacobian-transpose product: size mismatch");
  }
  const std::size_t in = x.size();
  Vector g(out * in + out);
  for (std::size_t m = 0; m < out; ++m) {
    const double um = u[m];
    double* row = g.data() + m * in;
    for (std::size_t n = 0; n < in; ++n) row[n] = um * x[n];
    g[out * in + m] = um;
  }
  return g;
}

namespace {

// δ = ∂L/∂v at the final layer: softmax(logits) − onehot(label).
Vector LogitGradient(const ForwardTrace& trace) {
  const double lse = LogSumExp(trace.logits);
  Vector delta(trace.logits.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    delta[i] = std::exp(trace.logits[i] - lse);
  }
  delta[trace.label] -= 1.0;
  return delta;
}

// Pulls δ at layer l+1 back to layer l through Wˡ⁺¹ and act'(vˡ).
Vector PullBack(const ForwardTrace& trace, const ModelParams& params,
                std::size_t l, const Vector& delta_next) {
  Vector d = TransposeTimes(params.layer(l + 1).weight, delta_next);
  const Activation act = params.spec(l).activation;
  const Vector& v = trace.pre_activations[l];
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= ActivateDerivative(act, v[i]);
  return d;
}

}  // namespace

std::vector<Vector> BackpropGradients(std::span<const double> x,
                                      std::size_t label,
                                      const ModelParams& params) {
  return BackpropFromTrace(ForwardClean(x, label, params), params);
}

std::vector<Vector> BackpropFromTrace(const ForwardTrace& trace,
                                      const ModelParams& params) {
  std::vector<Vector> grads(params.num_layers());
  Vector delta = LogitGradient(trace);
  for (std::size_t l = params.num_layers(); l-- > 0;) {
    grads[l] = LayerJacobianTransposeTimes(trace, l, delta);
    if (l > 0) delta = PullBack(trace, params, l - 1, delta);
  }
  return grads;
}

Vector InjectionPointGradient(const ForwardTrace& trace,
                              const ModelParams& params, std::size_t layer) {
  CheckLayerIndex(params, layer);
  Vector delta = LogitGradient(trace);
  for (std::size_t l = params.num_layers() - 1; l > layer; --l) {
    delta = PullBack(trace, params, l - 1, delta);
  }
  return delta;
}

std::size_t Predict(std::span<const double> x, const ModelParams& params) {
  if (x.size() != params.input_dim()) {
    Fail(ErrorCode::kDimension, "Predict: input size mismatch");
  }
  Vector current(x.begin(), x.end());
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    current = Affine(params.layer(l), current);
    const Activation act = params.spec(l).activation;
    for (double& e : current) e = Activate(act, e);
  }
  return static_cast<std::size_t>(
      std::max_element(current.begin(), current.end()) - current.begin());
}

}  // namespace dpulr
