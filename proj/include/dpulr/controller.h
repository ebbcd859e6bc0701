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

// Privacy controller. Picks the perturbation scale σ of one layer so that the
// batch-summed gradient estimate has covariance at least σ₀²C² in every
// direction:
//
//   σ² = min λ(Σ_d Σ̃_d) / (K·C²·σ₀²),   Σ̃_d = L₀(d)²·JᵀJ.
//
// When the summed covariance is singular or nearly so, the step is
// remediated instead: σ comes from a working budget and Gaussian top-up noise
// with variance max(0, σ₀²C² − λᵢ/(σ²K)) is added along each eigendirection.

#ifndef DPULR_CONTROLLER_H_
#define DPULR_CONTROLLER_H_

#include <cstddef>
#include <limits>
#include <string_view>

#include "dpulr/network.h"
#include "dpulr/numkit.h"

namespace dpulr {

// How σ is chosen on remediated steps.
//   kLargestEigenvalue: σ² = λ_max/(K·C²·σ₀²); the estimator then meets the
//     floor only along the top direction and top-up covers the rest.
//   kSmallestPositive: σ² from the smallest eigenvalue above the rank
//     threshold; top-up covers only the null space.
enum class WorkingSigma { kLargestEigenvalue, kSmallestPositive };

WorkingSigma ParseWorkingSigma(std::string_view name);
std::string_view WorkingSigmaName(WorkingSigma w);

struct ControllerSettings {
  std::size_t repeats = 100;  // K
  double clip = 1.0;          // C
  double sigma0 = 1.0;
  WorkingSigma working_sigma = WorkingSigma::kLargestEigenvalue;
  // Optional σ target. When finite, a layer whose floor-matching σ is below
  // the cap runs on the top-up path with σ = min(cap, working σ). Infinity
  // keeps the plain rule.
  double sigma_cap = std::numeric_limits<double>::infinity();
};

void ValidateControllerSettings(const ControllerSettings& s);

struct ControllerReport {
  std::size_t layer = 0;
  double min_eig = 0.0;
  double sigma = 0.0;
  bool remediated = false;
  // Top-up variances per eigendirection of the covariance block, descending
  // eigenvalue order; null-space directions last. Empty when not remediated.
  Vector extra_noise_variances;
};

// L₀²·jacᵀ·jac.
Matrix StandardCovariance(const ForwardTrace& trace, const Matrix& jac);

struct RankCheck {
  bool full_rank = false;
  std::size_t rank = 0;
};

// Rank counts eigenvalues above 1e-9·λ_max.
RankCheck CheckAssumptionFullRank(const Matrix& batch_cov_sum);

struct SigmaSelection {
  double min_eig = 0.0;
  // Set only when remediate is false.
  double sigma = 0.0;
  bool remediate = false;
};

// Largest σ meeting the floor (no cap), or a remediation signal when the sum is
// rank-deficient or min_eig < 1e-12·trace.
SigmaSelection SelectSigma(const Matrix& batch_cov_sum, std::size_t repeats,
                           double clip, double sigma0);

// Noise recipe for one layer on one step. The covariance block is replicated
// `replicas` times along the parameter vector; each replica gets independent
// noise with covariance
//   null_std²·(I − UUᵀ) + U·diag(range_std²)·Uᵀ.
struct NoisePlan {
  ControllerReport report;
  std::size_t block_dim = 0;
  std::size_t replicas = 1;
  bool linear_layout = false;  // replica m ↦ (W[m][:], b[m]); else identity
  Matrix range_basis;          // block_dim × r, orthonormal columns
  Vector range_std;            // r
  double null_std = 0.0;

  bool has_noise() const;
};

// Plan from a dense summed covariance in parameter coordinates.
NoisePlan PlanDense(const Matrix& batch_cov_sum, const ControllerSettings& s);

// Plan for a linear layer from the rows L₀(d)·(x(d), 1) of the batch,
// using JᵀJ = I_out ⊗ x̃x̃ᵀ. Uses the B×B Gram matrix when the batch is
// smaller than in_dim+1.
NoisePlan PlanLinearLayer(const Matrix& scaled_inputs, std::size_t out_dim,
                          const ControllerSettings& s);

// Plan when noise sits on the parameters (Jacobian = I):
// Σ Σ̃ = (Σ L₀²)·I.
NoisePlan PlanIsotropic(double sum_squared_loss, std::size_t dim,
                        const ControllerSettings& s);

// Draws the top-up vector in flattened parameter order. Zero if the plan
// calls for none.
Vector DrawPlanNoise(const NoisePlan& plan, RngStream& rng);

// Dense convenience: plan from batch_cov_sum and draw once.
Vector RemediationNoise(const Matrix& batch_cov_sum,
                        const ControllerSettings& s, RngStream& rng);

}  // namespace dpulr

#endif  // DPULR_CONTROLLER_H_
