#pragma once

// Dense row-major matrices, spectral-norm estimation and Björck
// orthogonalization. Products go through Eigen maps; everything else is
// plain loops over the row-major buffer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lipcert/error.hpp"

namespace lipcert {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, Vector data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorCode::ShapeMismatch,
            "matrix data length " + std::to_string(data_.size()) + " != " +
                std::to_string(rows_) + "x" + std::to_string(cols_));
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      require(r.size() == cols_, ErrorCode::ShapeMismatch, "ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  /// Single-row matrix holding `v`.
  static Matrix row_vector(std::span<const double> v) {
    return Matrix(1, v.size(), Vector(v.begin(), v.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const Vector& values() const noexcept { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  Matrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  Matrix& operator/=(double s) {
    for (double& v : data_) v /= s;
    return *this;
  }
  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator/(Matrix a, double s) { return a /= s; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same_shape(const Matrix& o) const {
    require(rows_ == o.rows_ && cols_ == o.cols_, ErrorCode::ShapeMismatch,
            "elementwise op on " + std::to_string(rows_) + "x" + std::to_string(cols_) + " and " +
                std::to_string(o.rows_) + "x" + std::to_string(o.cols_));
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

namespace detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

inline ConstMap view(const Matrix& m) { return {m.data().data(), Eigen::Index(m.rows()), Eigen::Index(m.cols())}; }
inline MutMap view(Matrix& m) { return {m.data().data(), Eigen::Index(m.rows()), Eigen::Index(m.cols())}; }

}  // namespace detail

/// A·B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorCode::ShapeMismatch, "matmul inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  if (out.empty()) return out;
  detail::view(out).noalias() = detail::view(a) * detail::view(b);
  return out;
}

/// A·Bᵀ
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), ErrorCode::ShapeMismatch, "matmul_bt inner dimensions differ");
  Matrix out(a.rows(), b.rows());
  if (out.empty()) return out;
  detail::view(out).noalias() = detail::view(a) * detail::view(b).transpose();
  return out;
}

/// Aᵀ·B
inline Matrix matmul_at(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), ErrorCode::ShapeMismatch, "matmul_at inner dimensions differ");
  Matrix out(a.cols(), b.cols());
  if (out.empty()) return out;
  detail::view(out).noalias() = detail::view(a).transpose() * detail::view(b);
  return out;
}

inline Vector matvec(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), ErrorCode::ShapeMismatch, "matvec dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    y[r] = std::inner_product(row.begin(), row.end(), x.begin(), 0.0);
  }
  return y;
}

/// Aᵀ·x
inline Vector matvec_t(const Matrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), ErrorCode::ShapeMismatch, "matvec_t dimension mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t c = 0; c < a.cols(); ++c) y[c] += row[c] * x[r];
  }
  return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::ShapeMismatch, "dot of unequal lengths");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm2(std::span<const double> v) {
  // scaled accumulation avoids overflow for large entries
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x / scale) * (x / scale);
  return scale * std::sqrt(s);
}

inline double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::ShapeMismatch, "distance between unequal lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ---------------------------------------------------------------------------
// Spectral norm

struct SpectralEstimate {
  double sigma = 0.0;
  Vector left_vec;
  Vector right_vec;
  std::size_t iterations_used = 0;
  bool converged = false;
};

/// Largest singular value by alternating power iteration on W and Wᵀ.
/// The start vector is deterministic: the heaviest column direction mixed
/// with a fixed quasi-random perturbation, so results never depend on
/// global state.
inline SpectralEstimate power_iteration(const Matrix& w, std::size_t max_iters, double tol) {
  require(max_iters >= 1, ErrorCode::InvalidArgument, "power_iteration needs max_iters >= 1");
  require(tol > 0.0, ErrorCode::InvalidArgument, "power_iteration needs tol > 0");
  const auto vals = w.data();
  require(!vals.empty() && std::any_of(vals.begin(), vals.end(), [](double x) { return x != 0.0; }),
          ErrorCode::ZeroMatrix, "power_iteration on an all-zero matrix");

  const std::size_t n = w.cols();
  std::size_t heaviest = 0;
  double best = -1.0;
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < w.rows(); ++r) s += w(r, c) * w(r, c);
    if (s > best) best = s, heaviest = c;
  }
  Vector v(n);
  for (std::size_t c = 0; c < n; ++c) v[c] = 0.25 * std::sin(1.618033988749895 * double(c + 1) + 0.5);
  v[heaviest] += 1.0;

  auto normalize = [](Vector& x) {
    const double nx = norm2(x);
    for (double& e : x) e /= nx;
    return nx;
  };
  normalize(v);

  SpectralEstimate est;
  Vector u;
  double prev = -1.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    u = matvec(w, v);
    if (norm2(u) == 0.0) {
      // start vector fell in the null space; restart on the heaviest column
      std::fill(v.begin(), v.end(), 0.0);
      v[heaviest] = 1.0;
      u = matvec(w, v);
    }
    normalize(u);
    v = matvec_t(w, u);
    const double sigma = normalize(v);
    est.iterations_used = it;
    est.sigma = sigma;
    if (prev >= 0.0 && std::abs(sigma - prev) < tol) {
      est.converged = true;
      break;
    }
    prev = sigma;
  }
  est.left_vec = std::move(u);
  est.right_vec = std::move(v);
  return est;
}

/// Spectral norm with settings tight enough for invariant checks.
inline double spectral_norm(const Matrix& w) {
  const auto vals = w.data();
  if (std::all_of(vals.begin(), vals.end(), [](double x) { return x == 0.0; })) return 0.0;
  return power_iteration(w, 2000, 1e-14).sigma;
}

// ---------------------------------------------------------------------------
// Orthogonalization

/// ‖GᵀG − I‖_F with G = W when W is tall or square, Wᵀ otherwise, i.e. the
/// Gram matrix of the smaller dimension.
inline double orthogonality_residual(const Matrix& w) {
  const Matrix gram = w.rows() >= w.cols() ? matmul_at(w, w) : matmul_bt(w, w);
  double s = 0.0;
  for (std::size_t i = 0; i < gram.rows(); ++i)
    for (std::size_t j = 0; j < gram.cols(); ++j) {
      const double d = gram(i, j) - (i == j ? 1.0 : 0.0);
      s += d * d;
    }
  return std::sqrt(s);
}

struct BjorckResult {
  Matrix matrix;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

inline constexpr double kPreScaleSlack = 1e-3;

/// First-order Björck iteration Q ← Q(3I − QᵀQ)/2 (wide matrices use the
/// row Gram, (3I − QQᵀ)Q/2). Input must already have spectral norm ≤ 1.
/// Once the residual drops below `tol` one more step is applied, which
/// squares the residual and makes a second call a no-op.
inline BjorckResult bjorck_orthogonalize(const Matrix& w, std::size_t iters, double tol) {
  require(iters >= 1, ErrorCode::InvalidArgument, "bjorck_orthogonalize needs iters >= 1");
  const double sigma = power_iteration(w, 50, 1e-9).sigma;
  require(sigma <= 1.0 + kPreScaleSlack, ErrorCode::NotPreScaled,
          "spectral norm " + std::to_string(sigma) + " exceeds 1; divide by the power-iteration estimate first");

  const bool tall = w.rows() >= w.cols();
  const std::size_t k = tall ? w.cols() : w.rows();
  BjorckResult out{w, 0, 0.0, false};
  Matrix& q = out.matrix;

  auto gram_of = [&](const Matrix& m) { return tall ? matmul_at(m, m) : matmul_bt(m, m); };
  auto residual_of = [&](const Matrix& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double d = g(i, j) - (i == j ? 1.0 : 0.0);
        s += d * d;
      }
    return std::sqrt(s);
  };
  auto step = [&](const Matrix& g) {
    Matrix m = g * -0.5;
    for (std::size_t i = 0; i < k; ++i) m(i, i) += 1.5;
    q = tall ? matmul(q, m) : matmul(m, q);
  };

  Matrix g = gram_of(q);
  out.residual = residual_of(g);
  if (out.residual < tol * 1e-6) {
    out.converged = true;
    return out;
  }
  for (std::size_t it = 0; it < iters; ++it) {
    const bool was_converged = out.residual < tol;
    step(g);
    ++out.iterations;
    g = gram_of(q);
    out.residual = residual_of(g);
    if (was_converged) {
      out.converged = true;
      return out;
    }
  }
  out.converged = out.residual < tol;
  return out;
}

}  // namespace lipcert
