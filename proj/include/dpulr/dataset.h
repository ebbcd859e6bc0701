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

#ifndef DPULR_DATASET_H_
#define DPULR_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpulr/numkit.h"

namespace dpulr {

// Row-major feature table with integer labels.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, std::size_t num_classes);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t num_classes() const { return num_classes_; }

  std::span<const double> input(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  std::size_t label(std::size_t i) const { return labels_[i]; }

  void Add(std::span<const double> x, std::size_t label);
  void Reserve(std::size_t n);

  // Rows at the given positions, in that order.
  Dataset Subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t num_classes_ = 0;
  Vector features_;
  std::vector<std::size_t> labels_;
};

// IDX image/label pair, raw or gzip-compressed. Pixels are scaled by 1/255.
// Labels must be below 10.
Dataset LoadMnistIdx(const std::string& images_path,
                     const std::string& labels_path);

// Parses in-memory IDX bytes (already decompressed).
Dataset ParseMnistIdx(std::span<const std::uint8_t> images,
                      std::span<const std::uint8_t> labels);

// Gaussian blobs: class c has mean (separation/2)·u_c for a random unit
// vector u_c and identity covariance; labels are balanced round-robin before
// shuffling.
Dataset SynthDataset(std::uint64_t seed, std::size_t n, std::size_t dim,
                     std::size_t classes, double separation);

struct DataSplit {
  Dataset train;
  Dataset valid;
};

// Shuffled split; round(valid_fraction·n) rows go to validation.
DataSplit SplitDataset(const Dataset& data, double valid_fraction,
                       std::uint64_t seed);

}  // namespace dpulr

#endif  // DPULR_DATASET_H_
