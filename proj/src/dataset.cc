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

#include "dpulr/dataset.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpulr/error.h"

namespace dpulr {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr std::size_t kMnistClasses = 10;

// gzread passes plain files through unchanged.
std::vector<std::uint8_t> ReadMaybeGzip(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) Fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes;
  std::uint8_t buf[1 << 16];
  for (;;) {
    const int n = gzread(f, buf, sizeof(buf));
    if (n < 0) {
      int errnum = 0;
      const std::string msg = gzerror(f, &errnum);
      gzclose(f);
      Fail(ErrorCode::kFormat, "'" + path + "': decompression failed after " +
                                   std::to_string(bytes.size()) +
                                   " bytes: " + msg);
    }
    if (n == 0) break;
    bytes.insert(bytes.end(), buf, buf + n);
  }
  gzclose(f);
  return bytes;
}

std::uint32_t ReadBigEndian32(std::span<const std::uint8_t> b,
                              std::size_t offset, const char* what) {
  if (offset + 4 > b.size()) {
    Fail(ErrorCode::kFormat, std::string(what) + ": truncated header at byte " +
                                 std::to_string(offset));
  }
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

}  // namespace

Dataset::Dataset(std::size_t dim, std::size_t num_classes)
    : dim_(dim), num_classes_(num_classes) {
  if (dim == 0 || num_classes == 0) {
    Fail(ErrorCode::kDomain, "dataset needs positive dim and class count");
  }
}

void Dataset::Add(std::span<const double> x, std::size_t label) {
  if (x.size() != dim_) Fail(ErrorCode::kDimension, "Dataset::Add: bad row size");
  if (label >= num_classes_) Fail(ErrorCode::kDomain, "Dataset::Add: bad label");
  features_.insert(features_.end(), x.begin(), x.end());
  labels_.push_back(label);
}

void Dataset::Reserve(std::size_t n) {
  features_.reserve(n * dim_);
  labels_.reserve(n);
}

Dataset Dataset::Subset(std::span<const std::size_t> indices) const {
  Dataset out(dim_, num_classes_);
  out.Reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) Fail(ErrorCode::kIndex, "Dataset::Subset: index out of range");
    out.Add(input(i), label(i));
  }
  return out;
}

Dataset ParseMnistIdx(std::span<const std::uint8_t> images,
                      std::span<const std::uint8_t> labels) {
  const std::uint32_t im = ReadBigEndian32(images, 0, "images");
  if (im != kImageMagic) {
    Fail(ErrorCode::kFormat, "images: bad magic at byte 0 (expected 0x00000803)");
  }
  const std::uint32_t lm = ReadBigEndian32(labels, 0, "labels");
  if (lm != kLabelMagic) {
    Fail(ErrorCode::kFormat, "labels: bad magic at byte 0 (expected 0x00000801)");
  }
  const std::size_t n = ReadBigEndian32(images, 4, "images");
  const std::size_t rows = ReadBigEndian32(images, 8, "images");
  const std::size_t cols = ReadBigEndian32(images, 12, "images");
  const std::size_t nl = ReadBigEndian32(labels, 4, "labels");
  if (n != nl) {
    Fail(ErrorCode::kFormat, "labels: count at byte 4 (" + std::to_string(nl) +
                                 ") differs from image count (" +
                                 std::to_string(n) + ")");
  }
  if (rows == 0 || cols == 0) {
    Fail(ErrorCode::kFormat, "images: zero dimension at byte 8");
  }
  const std::size_t dim = rows * cols;
  const std::size_t need_images = 16 + n * dim;
  if (images.size() < need_images) {
    Fail(ErrorCode::kFormat, "images: truncated at byte " +
                                 std::to_string(images.size()) + ", expected " +
                                 std::to_string(need_images) + " bytes");
  }
  if (labels.size() < 8 + n) {
    Fail(ErrorCode::kFormat, "labels: truncated at byte " +
                                 std::to_string(labels.size()) + ", expected " +
                                 std::to_string(8 + n) + " bytes");
  }
  Dataset data(dim, kMnistClasses);
  data.Reserve(n);
  Vector row(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* px = images.data() + 16 + i * dim;
    for (std::size_t j = 0; j < dim; ++j) row[j] = px[j] / 255.0;
    const std::size_t y = labels[8 + i];
    if (y >= kMnistClasses) {
      Fail(ErrorCode::kFormat, "labels: value " + std::to_string(y) +
                                   " at byte " + std::to_string(8 + i));
    }
    data.Add(row, y);
  }
  return data;
}

Dataset LoadMnistIdx(const std::string& images_path,
                     const std::string& labels_path) {
  const std::vector<std::uint8_t> images = ReadMaybeGzip(images_path);
  const std::vector<std::uint8_t> labels = ReadMaybeGzip(labels_path);
  return ParseMnistIdx(images, labels);
}

Dataset SynthDataset(std::uint64_t seed, std::size_t n, std::size_t dim,
                     std::size_t classes, double separation) {
  if (n < 1 || dim < 1 || classes < 1) {
    Fail(ErrorCode::kDomain, "synth dataset needs n, dim, classes >= 1");
  }
  if (!(separation >= 0.0)) Fail(ErrorCode::kDomain, "separation must be >= 0");
  const RngStream root(seed);
  RngStream mean_rng = root.Child(1);
  std::vector<Vector> means(classes);
  for (Vector& mu : means) {
    mu = GaussianVector(dim, 1.0, mean_rng);
    const double norm = Norm2(mu);
    for (double& v : mu) v *= 0.5 * separation / norm;
  }
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i % classes;
  RngStream shuffle_rng = root.Child(2);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(labels[i - 1], labels[shuffle_rng.NextBelow(i)]);
  }
  RngStream point_rng = root.Child(3);
  Dataset data(dim, classes);
  data.Reserve(n);
  Vector x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector& mu = means[labels[i]];
    for (std::size_t j = 0; j < dim; ++j) x[j] = mu[j] + point_rng.NextGaussian();
    data.Add(x, labels[i]);
  }
  return data;
}

DataSplit SplitDataset(const Dataset& data, double valid_fraction,
                       std::uint64_t seed) {
  if (!(valid_fraction >= 0.0 && valid_fraction < 1.0)) {
    Fail(ErrorCode::kConfig, "valid_fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.NextBelow(i)]);
  }
  const auto n_valid = static_cast<std::size_t>(
      std::llround(valid_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> valid(order.begin(), order.begin() + n_valid);
  std::vector<std::size_t> train(order.begin() + n_valid, order.end());
  std::sort(valid.begin(), valid.end());
  std::sort(train.begin(), train.end());
  return {data.Subset(train), data.Subset(valid)};
}

}  // namespace dpulr
