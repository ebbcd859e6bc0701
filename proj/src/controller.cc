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

#include <algorithm>
#include <cmath>
#include <string>

#include "dpulr/error.h"

namespace dpulr {
namespace {

constexpr double kRankTolerance = 1e-9;
constexpr double kTraceFloor = 1e-12;
constexpr double kNegativeTolerance = 1e-9;

// Builds a plan from the spectrum of one covariance block. `eigenvalues` is
// descending and may list fewer than block_dim values; the rest are zero.
// Column i of `basis` pairs with eigenvalues[i] for every i below the rank.
NoisePlan FromSpectrum(Vector eigenvalues, const Matrix& basis,
                       std::size_t block_dim, std::size_t replicas,
                       double trace, const ControllerSettings& s) {
  ValidateControllerSettings(s);
  double frob2 = 0.0;
  for (double l : eigenvalues) frob2 += l * l;
  const double neg_floor = -kNegativeTolerance * std::sqrt(frob2);
  for (double& l : eigenvalues) {
    if (l < neg_floor) {
      Fail(ErrorCode::kNumeric,
           "summed covariance is not positive semidefinite (eigenvalue " +
               std::to_string(l) + ")");
    }
    l = std::max(l, 0.0);
  }
  const double lambda_max = eigenvalues.empty() ? 0.0 : eigenvalues.front();
  std::size_t rank = 0;
  if (lambda_max > 0.0) {
    for (double l : eigenvalues) rank += l > kRankTolerance * lambda_max;
  }
  const double min_eig = eigenvalues.size() < block_dim || eigenvalues.empty()
                             ? 0.0
                             : eigenvalues.back();
  const double kc2s2 = static_cast<double>(s.repeats) * s.clip * s.clip *
                       s.sigma0 * s.sigma0;
  const double floor_var = s.sigma0 * s.sigma0 * s.clip * s.clip;

  NoisePlan plan;
  plan.block_dim = block_dim;
  plan.replicas = replicas;
  plan.report.min_eig = min_eig;
  const double floor_sigma = std::sqrt(min_eig / kc2s2);
  const bool deficient =
      lambda_max <= 0.0 || rank < block_dim || min_eig < kTraceFloor * trace;
  const bool remediate =
      deficient || (std::isfinite(s.sigma_cap) && floor_sigma < s.sigma_cap);
  plan.report.remediated = remediate;
  if (!remediate) {
    plan.report.sigma = floor_sigma;
    return plan;
  }
  if (lambda_max <= 0.0) {
    // Nothing to carry the floor: fall back to isotropic noise.
    plan.report.sigma = 1.0;
    plan.null_std = s.sigma0 * s.clip;
    plan.report.extra_noise_variances.assign(block_dim, floor_var);
    return plan;
  }
  double budget = s.working_sigma == WorkingSigma::kLargestEigenvalue
                      ? lambda_max
                      : eigenvalues[rank - 1];
  budget = std::min(budget, s.sigma_cap * s.sigma_cap * kc2s2);
  plan.report.sigma = std::sqrt(budget / kc2s2);
  plan.range_basis = Matrix(block_dim, rank);
  plan.range_std.resize(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const double extra = floor_var * std::max(0.0, 1.0 - eigenvalues[i] / budget);
    plan.report.extra_noise_variances.push_back(extra);
    plan.range_std[i] = std::sqrt(extra);
    for (std::size_t r = 0; r < block_dim; ++r) {
      plan.range_basis(r, i) = basis(r, i);
    }
  }
  if (rank < block_dim) {
    plan.null_std = s.sigma0 * s.clip;
    plan.report.extra_noise_variances.insert(
        plan.report.extra_noise_variances.end(), block_dim - rank, floor_var);
  }
  return plan;
}

}  // namespace

WorkingSigma ParseWorkingSigma(std::string_view name) {
  if (name == "largest") return WorkingSigma::kLargestEigenvalue;
  if (name == "smallest_positive") return WorkingSigma::kSmallestPositive;
  Fail(ErrorCode::kConfig, "unknown working_sigma '" + std::string(name) + "'");
}

std::string_view WorkingSigmaName(WorkingSigma w) {
  return w == WorkingSigma::kLargestEigenvalue ? "largest"
                                               : "smallest_positive";
}

void ValidateControllerSettings(const ControllerSettings& s) {
  if (s.repeats < 1) Fail(ErrorCode::kConfig, "K must be >= 1");
  if (!(s.clip > 0.0) || !std::isfinite(s.clip)) {
    Fail(ErrorCode::kConfig, "clip bound C must be positive");
  }
  if (!(s.sigma0 > 0.0) || !std::isfinite(s.sigma0)) {
    Fail(ErrorCode::kConfig, "sigma0 must be positive");
  }
  if (!(s.sigma_cap > 0.0)) {
    Fail(ErrorCode::kConfig, "sigma_cap must be positive");
  }
}

Matrix StandardCovariance(const ForwardTrace& trace, const Matrix& jac) {
  if (trace.pre_activations.empty()) {
    Fail(ErrorCode::kDimension, "StandardCovariance: empty trace");
  }
  return Gram(jac) * (trace.loss * trace.loss);
}

RankCheck CheckAssumptionFullRank(const Matrix& batch_cov_sum) {
  const EigenDecomposition eig = SymEigendecompose(batch_cov_sum);
  RankCheck out;
  const double lambda_max = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0];
  if (lambda_max > 0.0) {
    for (double l : eig.eigenvalues) out.rank += l > kRankTolerance * lambda_max;
  }
  out.full_rank = out.rank == batch_cov_sum.rows();
  return out;
}

SigmaSelection SelectSigma(const Matrix& batch_cov_sum, std::size_t repeats,
                           double clip, double sigma0) {
  ControllerSettings s;
  s.repeats = repeats;
  s.clip = clip;
  s.sigma0 = sigma0;
  const NoisePlan plan = PlanDense(batch_cov_sum, s);
  SigmaSelection out;
  out.min_eig = plan.report.min_eig;
  out.remediate = plan.report.remediated;
  if (!out.remediate) out.sigma = plan.report.sigma;
  return out;
}

bool NoisePlan::has_noise() const {
  if (null_std > 0.0) return true;
  return std::any_of(range_std.begin(), range_std.end(),
                     [](double v) { return v > 0.0; });
}

NoisePlan PlanDense(const Matrix& batch_cov_sum, const ControllerSettings& s) {
  const EigenDecomposition eig = SymEigendecompose(batch_cov_sum);
  return FromSpectrum(eig.eigenvalues, eig.eigenvectors, batch_cov_sum.rows(),
                      1, batch_cov_sum.Trace(), s);
}

NoisePlan PlanLinearLayer(const Matrix& scaled_inputs, std::size_t out_dim,
                          const ControllerSettings& s) {
  const std::size_t batch = scaled_inputs.rows();
  const std::size_t block_dim = scaled_inputs.cols();
  if (block_dim < 2 || out_dim < 1) {
    Fail(ErrorCode::kDimension, "PlanLinearLayer: bad block shape");
  }
  double trace = 0.0;
  for (double v : scaled_inputs.data()) trace += v * v;
  NoisePlan plan;
  if (batch >= block_dim) {
    const EigenDecomposition eig = SymEigendecompose(Gram(scaled_inputs));
    plan = FromSpectrum(eig.eigenvalues, eig.eigenvectors, block_dim, out_dim,
                        trace, s);
  } else if (batch == 0) {
    plan = FromSpectrum({}, Matrix(), block_dim, out_dim, 0.0, s);
  } else {
    // A·Aᵀ shares its nonzero spectrum with AᵀA; eigenvectors map through
    // u = Aᵀv/√λ.
    const Matrix at = scaled_inputs.Transpose();
    const EigenDecomposition eig = SymEigendecompose(Gram(at));
    const double lambda_max = eig.eigenvalues[0];
    Matrix basis(block_dim, batch);
    for (std::size_t i = 0; i < batch; ++i) {
      const double l = eig.eigenvalues[i];
      if (!(lambda_max > 0.0) || l <= kRankTolerance * lambda_max) break;
      const double inv = 1.0 / std::sqrt(l);
      for (std::size_t r = 0; r < block_dim; ++r) {
        double acc = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          acc += scaled_inputs(b, r) * eig.eigenvectors(b, i);
        }
        basis(r, i) = acc * inv;
      }
    }
    plan = FromSpectrum(eig.eigenvalues, basis, block_dim, out_dim, trace, s);
  }
  plan.linear_layout = true;
  return plan;
}

NoisePlan PlanIsotropic(double sum_squared_loss, std::size_t dim,
                        const ControllerSettings& s) {
  if (dim == 0) Fail(ErrorCode::kDimension, "PlanIsotropic: zero dimension");
  if (!(sum_squared_loss >= 0.0)) {
    Fail(ErrorCode::kNumeric, "PlanIsotropic: negative or NaN loss sum");
  }
  Vector eigenvalues;
  if (sum_squared_loss > 0.0) eigenvalues.assign(dim, sum_squared_loss);
  return FromSpectrum(std::move(eigenvalues), Matrix::Identity(dim), dim, 1,
                      sum_squared_loss * static_cast<double>(dim), s);
}

Vector DrawPlanNoise(const NoisePlan& plan, RngStream& rng) {
  const std::size_t bd = plan.block_dim;
  Vector out(bd * plan.replicas, 0.0);
  if (!plan.has_noise()) return out;
  const std::size_t rank = plan.range_std.size();
  Vector n(bd);
  for (std::size_t m = 0; m < plan.replicas; ++m) {
    if (plan.null_std > 0.0) {
      for (std::size_t r = 0; r < bd; ++r) n[r] = plan.null_std * rng.NextGaussian();
    } else {
      std::fill(n.begin(), n.end(), 0.0);
    }
    // Swap the isotropic component along each range direction for the
    // planned one.
    for (std::size_t i = 0; i < rank; ++i) {
      double proj = 0.0;
      if (plan.null_std > 0.0) {
        for (std::size_t r = 0; r < bd; ++r) proj += plan.range_basis(r, i) * n[r];
      }
      const double coef = plan.range_std[i] * rng.NextGaussian() - proj;
      if (coef == 0.0) continue;
      for (std::size_t r = 0; r < bd; ++r) n[r] += coef * plan.range_basis(r, i);
    }
    if (plan.linear_layout) {
      const std::size_t in = bd - 1;
      const std::size_t out_dim = plan.replicas;
      for (std::size_t c = 0; c < in; ++c) out[m * in + c] = n[c];
      out[out_dim * in + m] = n[in];
    } else {
      std::copy(n.begin(), n.end(), out.begin() + m * bd);
    }
  }
  return out;
}

Vector RemediationNoise(const Matrix& batch_cov_sum,
                        const ControllerSettings& s, RngStream& rng) {
  return DrawPlanNoise(PlanDense(batch_cov_sum, s), rng);
}

}  // namespace dpulr
