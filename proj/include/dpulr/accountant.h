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

// Rényi-DP accounting for the sampled-with-rejection Gaussian mechanism
// (SRGM): Poisson subsampling at rate q, batches below N_B redrawn, Gaussian
// noise with noise-to-sensitivity ratio σ₀. One step costs
//
//   γ(α) = q·P[X = N_B−1] / P[X > N_B−1]  +  2q²α/σ₀²,   X ~ Bin(N̄, q),
//
// the first term being the impairment caused by rejection. T steps cost T·γ,
// and an (α, γ)-RDP mechanism is (γ + ln(1/δ)/(α−1), δ)-DP.
//
// The bound is proven only for q ≤ 1/5, σ₀ ≥ 4, N_B ≤ q·N̄ and α meeting two
// transcendental conditions (AlphaValid). Outside that regime the same formula
// is still evaluated when not strict, and results carry regime_valid = false.
//
// σ₀ is measured relative to the clip bound C: the controller keeps the
// batch-gradient noise at ≥ σ₀·C per direction while clipping bounds the
// sensitivity by C, so C cancels.

#ifndef DPULR_ACCOUNTANT_H_
#define DPULR_ACCOUNTANT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dpulr/numkit.h"

namespace dpulr {

struct SrgmParams {
  double q = 0.01;
  double sigma0 = 4.0;
  std::uint64_t n_b = 1;
  std::uint64_t n_bar = 1;
};

// kSgm drops the impairment term: plain Poisson-subsampled Gaussian.
enum class Mechanism { kSrgm, kSgm };

void ValidateSrgmParams(const SrgmParams& p);

// q ≤ 1/5, σ₀ ≥ 4 and N_B ≤ q·N̄.
bool InProvenRegime(const SrgmParams& p);

// InProvenRegime plus both α conditions with A = ln(1 + 1/(q(α−1))).
bool AlphaValid(double alpha, const SrgmParams& p);

struct StepRdp {
  double impairment = 0.0;
  double main = 0.0;
  double gamma() const { return impairment + main; }
};

double ImpairmentTerm(const SrgmParams& p);
double MainTerm(double alpha, const SrgmParams& p);
StepRdp SrgmStepTerms(double alpha, const SrgmParams& p,
                      Mechanism mech = Mechanism::kSrgm);

// Per-step γ. Strict mode raises a validity error when !AlphaValid.
double SrgmStepRdp(double alpha, const SrgmParams& p, bool strict = false,
                   Mechanism mech = Mechanism::kSrgm);

// T·γ for T ≥ 1.
double Compose(double step_gamma, std::uint64_t steps);

double RdpToDp(double alpha, double gamma, double delta);

// Impairment term over main term.
double ImpairmentRatio(const SrgmParams& p, double alpha);

// {1.01, 1.02, …, 1.99} ∪ {2, 3, …, 256}.
std::vector<double> DefaultAlphaGrid();

struct EpsilonResult {
  double epsilon = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;            // composed over all steps at alpha
  double impairment_term = 0.0;  // per step
  double main_term = 0.0;        // per step at alpha
  bool regime_valid = false;
};

// Minimizes ε over the grid; in strict mode only over valid α, raising a
// validity error if none is valid.
EpsilonResult BestEpsilon(const SrgmParams& p, std::uint64_t steps,
                          double delta, bool strict = false,
                          Mechanism mech = Mechanism::kSrgm,
                          std::span<const double> alpha_grid = {});

// Running RDP totals over a fixed α grid. Steps with identical parameters are
// grouped, so the total for a group is exactly Compose(γ, count).
class RdpLedger {
 public:
  explicit RdpLedger(std::vector<double> alpha_grid = DefaultAlphaGrid());

  void AddSteps(const SrgmParams& p, Mechanism mech, std::uint64_t count = 1);

  const std::vector<double>& alpha_grid() const { return alpha_grid_; }
  std::uint64_t steps_accumulated() const { return steps_; }
  // Total γ per grid point.
  std::vector<double> Gammas() const;
  // Per grid point: every recorded group is valid at that α.
  std::vector<bool> Validity() const;

  // Best ε at delta. Non-strict searches the full grid.
  EpsilonResult Epsilon(double delta, bool strict = false) const;

 private:
  struct Group {
    SrgmParams params;
    Mechanism mech;
    std::uint64_t count;
  };
  std::vector<double> alpha_grid_;
  std::vector<Group> groups_;
  std::uint64_t steps_ = 0;
};

}  // namespace dpulr

#endif  // DPULR_ACCOUNTANT_H_
