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

#include "dpulr/numkit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "dpulr/error.h"

namespace dpulr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void CheckSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    Fail(ErrorCode::kDimension,
         std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
             "x" + std::to_string(a.cols()) + " vs " +
             std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    Fail(ErrorCode::kDimension, "Matrix: data length " +
                                    std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows) +
                                    "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) Fail(ErrorCode::kDimension, "Matrix: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::Identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::Diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::Transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double Matrix::FrobeniusNorm() const { return Norm2(data_); }

double Matrix::Trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

bool Matrix::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  CheckSameShape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  CheckSameShape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    Fail(ErrorCode::kDimension, "matrix product: inner dimensions differ");
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    Fail(ErrorCode::kDimension, "matrix-vector product: size mismatch");
  }
  Vector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = Dot(a.row(i), x);
  return out;
}

Matrix Gram(const Matrix& a) {
  Matrix out(a.cols(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) AddOuterProduct(out, a.row(r));
  return out;
}

Vector TransposeTimes(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    Fail(ErrorCode::kDimension, "transpose product: size mismatch");
  }
  Vector out(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] += xr * row[c];
  }
  return out;
}

void AddOuterProduct(Matrix& m, std::span<const double> u, double scale) {
  if (!m.square() || m.rows() != u.size()) {
    Fail(ErrorCode::kDimension, "outer product: size mismatch");
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = scale * u[i];
    if (ui == 0.0) continue;
    auto row = m.row(i);
    for (std::size_t j = 0; j < u.size(); ++j) row[j] += ui * u[j];
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) Fail(ErrorCode::kDimension, "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm2(std::span<const double> a) {
  // Scaled accumulation avoids overflow for huge entries.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : a) {
    if (v == 0.0) continue;
    const double av = std::fabs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

// ---------------------------------------------------------------------------
// RngStream

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Philox4x32-10 (Salmon et al., SC'11).
void Philox4x32(std::uint64_t counter, std::uint64_t key, std::uint32_t out[4]) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  std::uint32_t c0 = static_cast<std::uint32_t>(counter);
  std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
  std::uint32_t c2 = 0;
  std::uint32_t c3 = 0;
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c0 = hi1 ^ c1 ^ k0;
    c1 = lo1;
    c2 = hi0 ^ c3 ^ k1;
    c3 = lo0;
    k0 += kW0;
    k1 += kW1;
  }
  out[0] = c0;
  out[1] = c1;
  out[2] = c2;
  out[3] = c3;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed)
    : RngStream(seed, {}, SplitMix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

RngStream::RngStream(std::uint64_t seed, std::vector<std::uint64_t> path,
                     std::uint64_t key)
    : seed_(seed), path_(std::move(path)), key_(key) {}

RngStream RngStream::Child(std::uint64_t label) const {
  std::vector<std::uint64_t> path = path_;
  path.push_back(label);
  const std::uint64_t key = SplitMix64(SplitMix64(key_) ^ SplitMix64(~label));
  return RngStream(seed_, std::move(path), key);
}

void RngStream::Refill() {
  Philox4x32(counter_++, key_, block_);
  block_pos_ = 0;
}

std::uint64_t RngStream::NextU64() {
  if (block_pos_ > 2) Refill();
  const std::uint64_t lo = block_[block_pos_];
  const std::uint64_t hi = block_[block_pos_ + 1];
  block_pos_ += 2;
  return (hi << 32) | lo;
}

double RngStream::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RngStream::NextGaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_gaussian_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - NextUniform();
  const double u2 = NextUniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_gaussian_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RngStream::NextBelow(std::uint64_t n) {
  if (n == 0) Fail(ErrorCode::kDomain, "NextBelow: n must be positive");
  // Lemire's nearly-divisionless rejection.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = NextU64();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::uint64_t>(m >> 64);
    }
  }
}

Vector GaussianVector(std::size_t dim, double sigma, RngStream& rng) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    Fail(ErrorCode::kDomain, "GaussianVector: sigma must be positive");
  }
  Vector out(dim);
  for (double& v : out) v = sigma * rng.NextGaussian();
  return out;
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver

EigenDecomposition SymEigendecompose(const Matrix& m) {
  if (!m.square()) {
    Fail(ErrorCode::kDimension, "SymEigendecompose: matrix is " +
                                    std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
  }
  if (!m.AllFinite()) {
    Fail(ErrorCode::kNumeric, "SymEigendecompose: non-finite entries");
  }
  const std::size_t n = m.rows();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));
  }
  // Rows of vt are the eigenvectors; rotating rows keeps memory access
  // contiguous.
  Matrix vt = Matrix::Identity(n);
  const double norm = a.FrobeniusNorm();
  const double tolerance = 1e-12 * norm;

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && norm > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(2.0 * off) < tolerance) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Past the first few sweeps, annihilate entries that no longer
        // affect the diagonal at working precision.
        if (sweep > 3 && std::fabs(app) + 100.0 * std::fabs(apq) == std::fabs(app) &&
            std::fabs(aqq) + 100.0 * std::fabs(apq) == std::fabs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        auto row_p = a.row(p);
        auto row_q = a.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = row_p[k];
          const double akq = row_q[k];
          row_p[k] = c * akp - s * akq;
          row_q[k] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          a(k, p) = row_p[k];
          a(k, q) = row_q[k];
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        auto v_p = vt.row(p);
        auto v_q = vt.row(q);
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v_p[k];
          const double vkq = v_q[k];
          v_p[k] = c * vkp - s * vkq;
          v_q[k] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i) > a(j, j);
  });
  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    auto v = vt.row(order[j]);
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = v[i];
  }
  return out;
}

double MinEigenvalue(const EigenDecomposition& eig, double frobenius_norm) {
  if (eig.eigenvalues.empty()) {
    Fail(ErrorCode::kDimension, "MinEigenvalue: empty matrix");
  }
  const double lambda = eig.eigenvalues.back();
  if (lambda < 0.0 && lambda >= -1e-9 * frobenius_norm) return 0.0;
  return lambda;
}

double MinEigenvalue(const Matrix& m) {
  return MinEigenvalue(SymEigendecompose(m), m.FrobeniusNorm());
}

// ---------------------------------------------------------------------------
// Binomial probabilities

namespace {

void CheckBinomArgs(std::uint64_t k, std::uint64_t n, double q,
                    const char* op) {
  if (k > n) {
    Fail(ErrorCode::kDomain, std::string(op) + ": k=" + std::to_string(k) +
                                 " exceeds n=" + std::to_string(n));
  }
  if (!(q > 0.0 && q < 1.0)) {
    Fail(ErrorCode::kDomain, std::string(op) + ": q must lie in (0, 1)");
  }
}

// ln Γ(x+1) − [(x+½)ln x − x + ½ln 2π], the Stirling-series remainder.
double StirlingError(double x) {
  constexpr double kS0 = 1.0 / 12.0;
  constexpr double kS1 = 1.0 / 360.0;
  constexpr double kS2 = 1.0 / 1260.0;
  constexpr double kS3 = 1.0 / 1680.0;
  constexpr double kS4 = 1.0 / 1188.0;
  static const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
  if (x < 16.0) {
    return std::lgamma(x + 1.0) - (x + 0.5) * std::log(x) + x - kHalfLog2Pi;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  if (x > 500.0) return (kS0 - kS1 * inv2) * inv;
  if (x > 80.0) return (kS0 - (kS1 - kS2 * inv2) * inv2) * inv;
  if (x > 35.0) return (kS0 - (kS1 - (kS2 - kS3 * inv2) * inv2) * inv2) * inv;
  return (kS0 - (kS1 - (kS2 - (kS3 - kS4 * inv2) * inv2) * inv2) * inv2) * inv;
}

// Deviance term x·ln(x/np) + np − x, evaluated without cancellation near
// x ≈ np.
double Deviance(double x, double np) {
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

// ln Σ pmf(j) for j walking from `start` in direction `step` up to the
// exclusive bound `stop`, truncated once terms drop 40 nats below the running
// maximum.
double LogTailSum(std::int64_t start, std::int64_t stop, int step,
                  std::uint64_t n, double q) {
  const double log_ratio_q = std::log(q) - std::log1p(-q);
  double term = LogBinomPmf(static_cast<std::uint64_t>(start), n, q);
  double best = term;
  double sum = 1.0;  // Σ exp(term_j − best), rescaled when best changes.
  for (std::int64_t j = start;;) {
    const std::int64_t next = j + step;
    if (next == stop) break;
    // pmf(j+1)/pmf(j) = (n−j)/(j+1) · q/(1−q).
    if (step > 0) {
      term += std::log(static_cast<double>(n - j)) -
              std::log(static_cast<double>(j + 1)) + log_ratio_q;
    } else {
      term += std::log(static_cast<double>(j)) -
              std::log(static_cast<double>(n - j + 1)) - log_ratio_q;
    }
    j = next;
    if (term > best) {
      sum = sum * std::exp(best - term) + 1.0;
      best = term;
    } else {
      sum += std::exp(term - best);
      if (term < best - 40.0) break;
    }
  }
  return best + std::log(sum);
}

}  // namespace

double LogBinomPmf(std::uint64_t k, std::uint64_t n, double q) {
  CheckBinomArgs(k, n, q, "LogBinomPmf");
  if (k == 0) return static_cast<double>(n) * std::log1p(-q);
  if (k == n) return static_cast<double>(n) * std::log(q);
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double rest = nd - kd;
  // Loader's saddle-point form: the log-gamma terms of ln C(n,k) are split
  // into Stirling remainders and deviances so nothing large cancels.
  const double lc = StirlingError(nd) - StirlingError(kd) -
                    StirlingError(rest) - Deviance(kd, nd * q) -
                    Deviance(rest, nd * (1.0 - q));
  return lc + 0.5 * std::log(nd / (2.0 * std::numbers::pi * kd * rest));
}

double LogBinomCdf(std::uint64_t k, std::uint64_t n, double q) {
  CheckBinomArgs(k, n, q, "LogBinomCdf");
  if (k == n) return 0.0;
  const double mean = static_cast<double>(n) * q;
  if (static_cast<double>(k) <= mean) {
    return LogTailSum(static_cast<std::int64_t>(k), -1, -1, n, q);
  }
  const double log_sf = LogBinomSf(k, n, q);
  return std::log1p(-std::exp(log_sf));
}

double LogBinomSf(std::uint64_t k, std::uint64_t n, double q) {
  CheckBinomArgs(k, n, q, "LogBinomSf");
  if (k == n) return kNegInf;
  const double mean = static_cast<double>(n) * q;
  if (static_cast<double>(k + 1) >= mean) {
    return LogTailSum(static_cast<std::int64_t>(k + 1),
                      static_cast<std::int64_t>(n) + 1, +1, n, q);
  }
  // Lower tail is the small side: 1 − cdf without cancellation.
  const double log_cdf = LogTailSum(static_cast<std::int64_t>(k), -1, -1, n, q);
  return std::log1p(-std::exp(log_cdf));
}

double LogSumExp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double m = *std::max_element(values.begin(), values.end());
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace dpulr
