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

// Eigenvalues of a small symmetric matrix by bisection on Sylvester inertia:
// the number of eigenvalues below s equals the number of negative pivots in
// the symmetric elimination of A − s·I. Elimination runs in 50-digit floating
// point. Shares no code with the library's Jacobi solver.

#ifndef DPULR_TESTS_ORACLES_EIGEN_ORACLE_H_
#define DPULR_TESTS_ORACLES_EIGEN_ORACLE_H_

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

using Float50 = boost::multiprecision::cpp_bin_float_50;

// Row-major n×n symmetric input.
class SymmetricOracle {
 public:
  SymmetricOracle(std::vector<double> a, std::size_t n) : n_(n) {
    a_.reserve(a.size());
    for (double v : a) a_.emplace_back(v);
    double frob = 0.0;
    for (double v : a) frob += v * v;
    bound_ = std::sqrt(frob) + 1.0;
  }

  // Eigenvalues strictly below s.
  std::size_t CountBelow(const Float50& s) const {
    std::vector<Float50> m = a_;
    for (std::size_t i = 0; i < n_; ++i) m[i * n_ + i] -= s;
    std::size_t negative = 0;
    const Float50 tiny = Float50(1e-40);
    for (std::size_t k = 0; k < n_; ++k) {
      Float50 pivot = m[k * n_ + k];
      // An exact zero pivot means s is an eigenvalue; perturbing it upward
      // counts that eigenvalue as not below s.
      if (pivot == 0) pivot = tiny;
      if (pivot < 0) ++negative;
      for (std::size_t i = k + 1; i < n_; ++i) {
        const Float50 f = m[i * n_ + k] / pivot;
        if (f == 0) continue;
        for (std::size_t j = k + 1; j < n_; ++j) {
          m[i * n_ + j] -= f * m[k * n_ + j];
        }
      }
    }
    return negative;
  }

  // k-th smallest eigenvalue, k = 0 for the minimum.
  double Eigenvalue(std::size_t k, int iterations = 200) const {
    Float50 lo = -bound_;
    Float50 hi = bound_;
    for (int it = 0; it < iterations; ++it) {
      const Float50 mid = (lo + hi) / 2;
      if (CountBelow(mid) > k) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return static_cast<double>((lo + hi) / 2);
  }

  double Min() const { return Eigenvalue(0); }
  double Max() const { return Eigenvalue(n_ - 1); }

 private:
  std::size_t n_;
  std::vector<Float50> a_;
  double bound_;
};

}  // namespace oracle

#endif  // DPULR_TESTS_ORACLES_EIGEN_ORACLE_H_
