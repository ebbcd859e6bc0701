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

// Numerical substrate: dense row-major matrices, a symmetric eigensolver,
// a counter-based random stream with label-derived substreams, and
// log-space binomial probabilities.

#ifndef DPULR_NUMKIT_H_
#define DPULR_NUMKIT_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace dpulr {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix Identity(std::size_t n);
  static Matrix Diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix Transpose() const;
  double FrobeniusNorm() const;
  double Trace() const;
  bool AllFinite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

// aᵀ·a without materializing the transpose.
Matrix Gram(const Matrix& a);
// aᵀ·x.
Vector TransposeTimes(const Matrix& a, std::span<const double> x);
// Adds scale·u·uᵀ to m.
void AddOuterProduct(Matrix& m, std::span<const double> u, double scale = 1.0);

double Dot(std::span<const double> a, std::span<const double> b);
double Norm2(std::span<const double> a);

// ---------------------------------------------------------------------------
// Random streams.

// Counter-based stream: Philox4x32-10 keyed by a 64-bit key derived from the
// seed and the derivation path. Identical (seed, path) pairs produce identical
// sequences; Child() derives an independent stream without advancing this one.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);

  RngStream Child(std::uint64_t label) const;
  RngStream Child(std::uint64_t a, std::uint64_t b) const {
    return Child(a).Child(b);
  }

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }

  std::uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double NextUniform();
  // Standard normal via Box-Muller. The library's std::normal_distribution is
  // avoided because its output is implementation-defined.
  double NextGaussian();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t NextBelow(std::uint64_t n);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return NextU64(); }

 private:
  RngStream(std::uint64_t seed, std::vector<std::uint64_t> path,
            std::uint64_t key);
  void Refill();

  std::uint64_t seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::uint32_t block_[4] = {0, 0, 0, 0};
  int block_pos_ = 4;
  double spare_gaussian_ = 0.0;
  bool has_spare_ = false;
};

// i.i.d. N(0, sigma²) coordinates. sigma must be positive.
Vector GaussianVector(std::size_t dim, double sigma, RngStream& rng);

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition.

struct EigenDecomposition {
  Vector eigenvalues;  // descending
  Matrix eigenvectors;  // column j pairs with eigenvalues[j]
};

// Cyclic Jacobi. The input is symmetrized by averaging with its transpose.
// Sweeps stop once the off-diagonal Frobenius mass falls below
// 1e-12·‖m‖_F, or after 100 sweeps.
EigenDecomposition SymEigendecompose(const Matrix& m);

// Smallest eigenvalue. Negatives within 1e-9·‖m‖_F of zero are clamped to
// zero (round-off on PSD inputs); larger negatives are returned unchanged.
double MinEigenvalue(const Matrix& m);
double MinEigenvalue(const EigenDecomposition& eig, double frobenius_norm);

// ---------------------------------------------------------------------------
// Binomial probabilities in log space.

// ln[C(n,k)·q^k·(1−q)^(n−k)], 0 < q < 1.
double LogBinomPmf(std::uint64_t k, std::uint64_t n, double q);
// ln P(X ≤ k).
double LogBinomCdf(std::uint64_t k, std::uint64_t n, double q);
// ln P(X > k) = ln(1 − P(k; n, q)).
double LogBinomSf(std::uint64_t k, std::uint64_t n, double q);

// Numerically stable ln Σ exp(v).
double LogSumExp(std::span<const double> values);

}  // namespace dpulr

#endif  // DPULR_NUMKIT_H_
