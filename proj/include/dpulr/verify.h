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

// Monte-Carlo check of the likelihood-ratio proxy on a small seeded network:
// the sample mean against backpropagation and the sample covariance against
// (L₀²/σ²)·JᵀJ.

#ifndef DPULR_VERIFY_H_
#define DPULR_VERIFY_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dpulr/network.h"

namespace dpulr {

struct TinyProblem {
  ModelParams params;  // 2 → 4 (gelu) → 3
  Vector x;
  std::size_t label = 0;
};

TinyProblem MakeTinyProblem(std::uint64_t seed);

struct LayerVerification {
  std::size_t layer = 0;
  std::size_t num_params = 0;
  double clean_loss = 0.0;
  double grad_norm = 0.0;
  // Per coordinate |mean − grad| / (sample std / √samples), maximized.
  double max_abs_z = 0.0;
  double max_abs_dev = 0.0;
  // ‖mean − grad‖ / ‖grad‖.
  double rel_dev = 0.0;
  // ‖Cov − (L₀²/σ²)JᵀJ‖_F / ‖(L₀²/σ²)JᵀJ‖_F.
  double cov_rel_error = 0.0;
};

struct VerificationReport {
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::size_t samples = 0;
  std::vector<LayerVerification> layers;
};

VerificationReport VerifyGradient(std::uint64_t seed, double sigma,
                                  std::size_t samples);

}  // namespace dpulr

#endif  // DPULR_VERIFY_H_
