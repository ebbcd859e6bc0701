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

#include "dpulr/sampler.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpulr/error.h"

namespace dpulr {
namespace {

void CheckSamplingArgs(std::size_t dataset_size, double q, std::size_t n_b) {
  if (!(q > 0.0 && q <= 1.0)) {
    Fail(ErrorCode::kDomain, "sampling rate q=" + std::to_string(q) +
                                 " outside (0, 1]");
  }
  if (n_b < 1 || n_b > dataset_size) {
    Fail(ErrorCode::kConfig, "minimum batch size " + std::to_string(n_b) +
                                 " outside [1, " +
                                 std::to_string(dataset_size) + "]");
  }
}

}  // namespace

BatchDraw DrawBatch(std::size_t dataset_size, double q, std::size_t n_b,
                    RngStream& rng) {
  CheckSamplingArgs(dataset_size, q, n_b);
  BatchDraw draw;
  if (q == 1.0) {
    draw.indices.resize(dataset_size);
    for (std::size_t i = 0; i < dataset_size; ++i) draw.indices[i] = i;
    return draw;
  }
  for (std::uint64_t attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    draw.indices.clear();
    for (std::size_t i = 0; i < dataset_size; ++i) {
      if (rng.NextUniform() < q) draw.indices.push_back(i);
    }
    if (draw.indices.size() >= n_b) return draw;
    ++draw.rejections;
  }
  Fail(ErrorCode::kConfig,
       "batch rejection loop exceeded " +
           std::to_string(kMaxRejectionAttempts) + " attempts (n_b=" +
           std::to_string(n_b) + ", q*N=" +
           std::to_string(q * static_cast<double>(dataset_size)) + ")");
}

BatchDraw DrawPoissonBatch(std::size_t dataset_size, double q,
                           RngStream& rng) {
  if (!(q > 0.0 && q <= 1.0)) {
    Fail(ErrorCode::kDomain, "sampling rate q=" + std::to_string(q) +
                                 " outside (0, 1]");
  }
  BatchDraw draw;
  for (std::size_t i = 0; i < dataset_size; ++i) {
    if (q == 1.0 || rng.NextUniform() < q) draw.indices.push_back(i);
  }
  return draw;
}

std::vector<std::pair<std::size_t, double>> BatchSizePmf(
    std::size_t dataset_size, double q, std::size_t n_b) {
  CheckSamplingArgs(dataset_size, q, n_b);
  std::vector<std::pair<std::size_t, double>> pmf;
  if (q == 1.0) {
    pmf.emplace_back(dataset_size, 1.0);
    return pmf;
  }
  const double log_norm = LogBinomSf(n_b - 1, dataset_size, q);
  pmf.reserve(dataset_size - n_b + 1);
  for (std::size_t k = n_b; k <= dataset_size; ++k) {
    pmf.emplace_back(k, std::exp(LogBinomPmf(k, dataset_size, q) - log_norm));
  }
  return pmf;
}

PermutationBatcher::PermutationBatcher(std::size_t dataset_size,
                                       std::size_t batch_size)
    : dataset_size_(dataset_size), batch_size_(batch_size) {
  if (batch_size < 1 || batch_size > dataset_size) {
    Fail(ErrorCode::kConfig, "permutation batch size " +
                                 std::to_string(batch_size) + " outside [1, " +
                                 std::to_string(dataset_size) + "]");
  }
  batches_per_epoch_ = dataset_size / batch_size;
  order_.resize(dataset_size);
}

BatchDraw PermutationBatcher::Draw(std::uint64_t step, const RngStream& rng) {
  const std::uint64_t epoch = step / batches_per_epoch_;
  const std::size_t slot = static_cast<std::size_t>(step % batches_per_epoch_);
  if (epoch != cached_epoch_) {
    for (std::size_t i = 0; i < dataset_size_; ++i) order_[i] = i;
    RngStream shuffle = rng.Child(epoch);
    // Fisher-Yates with our own stream; std::shuffle is implementation-defined.
    for (std::size_t i = dataset_size_; i > 1; --i) {
      std::swap(order_[i - 1], order_[shuffle.NextBelow(i)]);
    }
    cached_epoch_ = epoch;
  }
  BatchDraw draw;
  draw.indices.assign(order_.begin() + slot * batch_size_,
                      order_.begin() + (slot + 1) * batch_size_);
  std::sort(draw.indices.begin(), draw.indices.end());
  return draw;
}

}  // namespace dpulr
