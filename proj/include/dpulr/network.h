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

// Feed-forward network of linear layers with elementwise activations and a
// softmax cross-entropy loss.
//
// Layer l maps its input xˡ to the pre-activation vˡ = Wˡxˡ + bˡ and then to
// xˡ⁺¹ = act(vˡ). Noise for likelihood-ratio estimation is injected into vˡ,
// before the activation. Parameters of layer l are flattened as the weight
// matrix in row-major order followed by the bias: index m·in + n addresses
// W[m][n] and out·in + m addresses b[m].

#ifndef DPULR_NETWORK_H_
#define DPULR_NETWORK_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpulr/numkit.h"

namespace dpulr {

enum class Activation { kGelu, kRelu, kIdentity };

Activation ParseActivation(std::string_view name);
std::string_view ActivationName(Activation a);

double Activate(Activation a, double v);
double ActivateDerivative(Activation a, double v);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::kIdentity;

  std::size_t num_params() const { return out_dim * in_dim + out_dim; }
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Validates dims, chaining, and the identity activation on the final layer.
void ValidateArchitecture(std::span<const LayerSpec> layers);

struct LayerParams {
  Matrix weight;  // out_dim × in_dim
  Vector bias;    // out_dim
};

class ModelParams {
 public:
  ModelParams() = default;
  // Zero-initialized parameters for the given architecture.
  explicit ModelParams(std::vector<LayerSpec> specs);

  // Weights and biases uniform on ±1/√in_dim, the usual default for
  // linear layers.
  static ModelParams RandomInit(std::vector<LayerSpec> specs, RngStream& rng);

  std::size_t num_layers() const { return specs_.size(); }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  const LayerSpec& spec(std::size_t l) const { return specs_.at(l); }
  const LayerParams& layer(std::size_t l) const { return layers_.at(l); }
  LayerParams& layer(std::size_t l) { return layers_.at(l); }

  std::size_t input_dim() const { return specs_.front().in_dim; }
  std::size_t output_dim() const { return specs_.back().out_dim; }
  std::size_t num_params() const;

  // Flattened parameters of layer l (weight row-major, then bias).
  Vector Flatten(std::size_t l) const;
  void Assign(std::size_t l, std::span<const double> flat);
  // θˡ += delta.
  void AddToLayer(std::size_t l, std::span<const double> delta);

  friend bool operator==(const ModelParams&, const ModelParams&);

 private:
  std::vector<LayerSpec> specs_;
  std::vector<LayerParams> layers_;
};

// Noise-free pass. inputs[l] is xˡ, pre_activations[l] is vˡ.
struct ForwardTrace {
  std::vector<Vector> inputs;
  std::vector<Vector> pre_activations;
  Vector logits;
  std::size_t label = 0;
  double loss = 0.0;
};

// Softmax cross-entropy with log-sum-exp stabilization.
double CrossEntropy(std::span<const double> logits, std::size_t label);

ForwardTrace ForwardClean(std::span<const double> x, std::size_t label,
                          const ModelParams& params);

// Loss when the flow at layer l is replaced by act(vˡ + z). z = 0 reproduces
// ForwardClean's loss bit-for-bit.
double ForwardNoisy(std::span<const double> x, std::size_t label,
                    const ModelParams& params, std::size_t layer,
                    std::span<const double> z);

// Same as ForwardNoisy but reuses the clean prefix recorded in `trace`.
double NoisyLossFromTrace(const ForwardTrace& trace, const ModelParams& params,
                          std::size_t layer, std::span<const double> z);

// Loss with θˡ replaced by θˡ + z, z in flattened parameter order. This is
// noise injection at the "virtual linear layer" whose output is θˡ itself.
double ParamNoisyLossFromTrace(const ForwardTrace& trace,
                               const ModelParams& params, std::size_t layer,
                               std::span<const double> z);

// Dense Jacobian ∂vˡ/∂θˡ (out_dim × num_params).
Matrix LayerJacobian(const ForwardTrace& trace, const ModelParams& params,
                     std::size_t layer);

// (∂vˡ/∂θˡ)ᵀ·u using the sparsity of a linear layer: the weight block is
// u·xˡᵀ and the bias block is u.
Vector LayerJacobianTransposeTimes(const ForwardTrace& trace,
                                   std::size_t layer,
                                   std::span<const double> u);

// Exact gradients of the clean loss, one flattened vector per layer.
std::vector<Vector> BackpropGradients(std::span<const double> x,
                                      std::size_t label,
                                      const ModelParams& params);
std::vector<Vector> BackpropFromTrace(const ForwardTrace& trace,
                                      const ModelParams& params);

// ∂L/∂vˡ on the clean trace: the gradient of the loss with respect to the
// injection point of layer l.
Vector InjectionPointGradient(const ForwardTrace& trace,
                              const ModelParams& params, std::size_t layer);

std::size_t Predict(std::span<const double> x, const ModelParams& params);

}  // namespace dpulr

#endif  // DPULR_NETWORK_H_
