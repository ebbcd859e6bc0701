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

#include <cmath>
#include <limits>
#include <string>

#include "dpulr/error.h"

namespace dpulr {

void ValidateSrgmParams(const SrgmParams& p) {
  if (!(p.q > 0.0 && p.q <= 1.0)) {
    Fail(ErrorCode::kDomain, "q=" + std::to_string(p.q) + " outside (0, 1]");
  }
  if (!(p.sigma0 > 0.0) || !std::isfinite(p.sigma0)) {
    Fail(ErrorCode::kDomain, "sigma0 must be positive");
  }
  if (p.n_b < 1) Fail(ErrorCode::kDomain, "n_b must be >= 1");
  if (p.n_b > p.n_bar) {
    Fail(ErrorCode::kDomain, "n_b=" + std::to_string(p.n_b) +
                                 " exceeds n_bar=" + std::to_string(p.n_bar));
  }
}

bool InProvenRegime(const SrgmParams& p) {
  return p.q <= 0.2 && p.sigma0 >= 4.0 &&
         static_cast<double>(p.n_b) <= p.q * static_cast<double>(p.n_bar);
}

bool AlphaValid(double alpha, const SrgmParams& p) {
  if (!(alpha > 1.0) || !InProvenRegime(p)) return false;
  const double q = p.q;
  const double s2 = p.sigma0 * p.sigma0;
  const double log_s = std::log(p.sigma0);
  const double a = std::log1p(1.0 / (q * (alpha - 1.0)));
  if (alpha > 0.5 * s2 * a - 2.0 * log_s) return false;
  const double denom = a + std::log(q * alpha) + 1.0 / (2.0 * s2);
  const double numer = 0.5 * s2 * a * a - std::log(5.0) - 2.0 * log_s;
  // A + ln(qα) = ln(qα + α/(α−1)) > 0, so denom is positive.
  return alpha <= numer / denom;
}

double ImpairmentTerm(const SrgmParams& p) {
  ValidateSrgmParams(p);
  // P[X = N_B−1] = 0 when every example is always drawn.
  if (p.q >= 1.0) return 0.0;
  const std::uint64_t k = p.n_b - 1;
  const double log_ratio =
      LogBinomPmf(k, p.n_bar, p.q) - LogBinomSf(k, p.n_bar, p.q);
  return p.q * std::exp(log_ratio);
}

double MainTerm(double alpha, const SrgmParams& p) {
  return 2.0 * p.q * p.q * alpha / (p.sigma0 * p.sigma0);
}

StepRdp SrgmStepTerms(double alpha, const SrgmParams& p, Mechanism mech) {
  if (!(alpha > 1.0)) Fail(ErrorCode::kDomain, "alpha must exceed 1");
  ValidateSrgmParams(p);
  StepRdp out;
  out.main = MainTerm(alpha, p);
  if (mech == Mechanism::kSrgm) out.impairment = ImpairmentTerm(p);
  return out;
}

double SrgmStepRdp(double alpha, const SrgmParams& p, bool strict,
                   Mechanism mech) {
  if (strict && !AlphaValid(alpha, p)) {
    Fail(ErrorCode::kValidity,
         "alpha=" + std::to_string(alpha) +
             " is outside the proven regime for these parameters");
  }
  return SrgmStepTerms(alpha, p, mech).gamma();
}

double Compose(double step_gamma, std::uint64_t steps) {
  if (steps < 1) Fail(ErrorCode::kDomain, "composition needs T >= 1");
  return static_cast<double>(steps) * step_gamma;
}

double RdpToDp(double alpha, double gamma, double delta) {
  if (!(alpha > 1.0)) Fail(ErrorCode::kDomain, "alpha must exceed 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    Fail(ErrorCode::kDomain, "delta must lie in (0, 1)");
  }
  return gamma + std::log(1.0 / delta) / (alpha - 1.0);
}

double ImpairmentRatio(const SrgmParams& p, double alpha) {
  const StepRdp t = SrgmStepTerms(alpha, p);
  return t.impairment / t.main;
}

std::vector<double> DefaultAlphaGrid() {
  std::vector<double> grid;
  for (int i = 1; i <= 99; ++i) grid.push_back(1.0 + i / 100.0);
  for (int a = 2; a <= 256; ++a) grid.push_back(a);
  return grid;
}

EpsilonResult BestEpsilon(const SrgmParams& p, std::uint64_t steps,
                          double delta, bool strict, Mechanism mech,
                          std::span<const double> alpha_grid) {
  RdpLedger ledger(alpha_grid.empty()
                       ? DefaultAlphaGrid()
                       : std::vector<double>(alpha_grid.begin(),
                                             alpha_grid.end()));
  ledger.AddSteps(p, mech, steps);
  return ledger.Epsilon(delta, strict);
}

RdpLedger::RdpLedger(std::vector<double> alpha_grid)
    : alpha_grid_(std::move(alpha_grid)) {
  if (alpha_grid_.empty()) Fail(ErrorCode::kDomain, "empty alpha grid");
  for (std::size_t i = 0; i < alpha_grid_.size(); ++i) {
    if (!(alpha_grid_[i] > 1.0) ||
        (i > 0 && !(alpha_grid_[i] > alpha_grid_[i - 1]))) {
      Fail(ErrorCode::kDomain, "alpha grid must be ascending and > 1");
    }
  }
}

void RdpLedger::AddSteps(const SrgmParams& p, Mechanism mech,
                         std::uint64_t count) {
  ValidateSrgmParams(p);
  if (count == 0) return;
  steps_ += count;
  for (Group& g : groups_) {
    if (g.mech == mech && g.params.q == p.q && g.params.sigma0 == p.sigma0 &&
        g.params.n_b == p.n_b && g.params.n_bar == p.n_bar) {
      g.count += count;
      return;
    }
  }
  groups_.push_back({p, mech, count});
}

std::vector<double> RdpLedger::Gammas() const {
  std::vector<double> out(alpha_grid_.size(), 0.0);
  for (const Group& g : groups_) {
    const double imp =
        g.mech == Mechanism::kSrgm ? ImpairmentTerm(g.params) : 0.0;
    for (std::size_t i = 0; i < alpha_grid_.size(); ++i) {
      out[i] += Compose(imp + MainTerm(alpha_grid_[i], g.params), g.count);
    }
  }
  return out;
}

std::vector<bool> RdpLedger::Validity() const {
  std::vector<bool> out(alpha_grid_.size(), true);
  for (const Group& g : groups_) {
    for (std::size_t i = 0; i < alpha_grid_.size(); ++i) {
      out[i] = out[i] && AlphaValid(alpha_grid_[i], g.params);
    }
  }
  return out;
}

EpsilonResult RdpLedger::Epsilon(double delta, bool strict) const {
  if (steps_ == 0) Fail(ErrorCode::kDomain, "ledger has no steps");
  const std::vector<double> gammas = Gammas();
  const std::vector<bool> valid = Validity();
  EpsilonResult best;
  best.epsilon = std::numeric_limits<double>::infinity();
  std::size_t best_i = alpha_grid_.size();
  for (std::size_t i = 0; i < alpha_grid_.size(); ++i) {
    if (strict && !valid[i]) continue;
    const double eps = RdpToDp(alpha_grid_[i], gammas[i], delta);
    if (eps < best.epsilon) {
      best.epsilon = eps;
      best_i = i;
    }
  }
  if (best_i == alpha_grid_.size()) {
    Fail(ErrorCode::kValidity,
         "no alpha on the grid satisfies the proven-regime conditions "
         "(requires q <= 0.2, sigma0 >= 4, n_b <= q*n_bar and the alpha "
         "bounds); rerun without strict to evaluate the formula anyway");
  }
  best.alpha = alpha_grid_[best_i];
  best.gamma = gammas[best_i];
  best.regime_valid = valid[best_i];
  for (const Group& g : groups_) {
    const StepRdp t = SrgmStepTerms(best.alpha, g.params, g.mech);
    best.impairment_term += t.impairment;
    best.main_term += t.main;
  }
  return best;
}

}  // namespace dpulr
