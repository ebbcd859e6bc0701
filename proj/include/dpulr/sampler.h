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

// Batch sampling: Poisson subsampling with rejection of batches smaller than
// a minimum size, plus fixed-size permutation batching.

#ifndef DPULR_SAMPLER_H_
#define DPULR_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "dpulr/numkit.h"

namespace dpulr {

struct BatchDraw {
  std::vector<std::size_t> indices;  // ascending, no duplicates
  std::uint64_t rejections = 0;
};

inline constexpr std::uint64_t kMaxRejectionAttempts = 1'000'000;

// Each index is kept independently with probability q; draws with fewer than
// n_b members are discarded and redrawn.
BatchDraw DrawBatch(std::size_t dataset_size, double q, std::size_t n_b,
                    RngStream& rng);

// Plain Poisson subsampling; the batch may be empty.
BatchDraw DrawPoissonBatch(std::size_t dataset_size, double q, RngStream& rng);

// Distribution of the accepted batch size, sizes n_b..N in order.
std::vector<std::pair<std::size_t, double>> BatchSizePmf(
    std::size_t dataset_size, double q, std::size_t n_b);

// Fixed-size batches from a fresh shuffle each epoch. The privacy analysis
// does not cover this mode.
class PermutationBatcher {
 public:
  PermutationBatcher(std::size_t dataset_size, std::size_t batch_size);

  // Batch `step` of the run; the epoch's shuffle is derived from
  // rng.Child(epoch).
  BatchDraw Draw(std::uint64_t step, const RngStream& rng);

  std::size_t batches_per_epoch() const { return batches_per_epoch_; }

 private:
  std::size_t dataset_size_;
  std::size_t batch_size_;
  std::size_t batches_per_epoch_;
  std::uint64_t cached_epoch_ = ~std::uint64_t{0};
  std::vector<std::size_t> order_;
};

}  // namespace dpulr

#endif  // DPULR_SAMPLER_H_
