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

#ifndef DPULR_TESTS_TEST_UTIL_H_
#define DPULR_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dpulr/network.h"
#include "dpulr/numkit.h"
#include "oracles/reference_mlp.h"

namespace dpulr::testing {

inline oracle::RefMlp ToReference(const ModelParams& p) {
  std::vector<oracle::RefLayer> layers;
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    const LayerSpec& s = p.spec(l);
    oracle::RefLayer r;
    r.in = s.in_dim;
    r.out = s.out_dim;
    r.act = std::string(ActivationName(s.activation));
    for (double w : p.layer(l).weight.data()) r.w.push_back(w);
    for (double b : p.layer(l).bias) r.b.push_back(b);
    layers.push_back(std::move(r));
  }
  return oracle::RefMlp(std::move(layers));
}

inline std::vector<long double> ToLong(std::span<const double> v) {
  return {v.begin(), v.end()};
}

inline ModelParams SeededNet(std::vector<LayerSpec> specs, std::uint64_t seed) {
  RngStream rng(seed);
  return ModelParams::RandomInit(std::move(specs), rng);
}

inline Vector SeededVector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  RngStream rng(seed);
  return GaussianVector(n, scale, rng);
}

inline double RelDiff(double a, double b) {
  const double d = std::abs(a - b);
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? d : d / m;
}

// Fresh empty directory under the system temp dir.
inline std::string TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("dpulr_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace dpulr::testing

#endif  // DPULR_TESTS_TEST_UTIL_H_
