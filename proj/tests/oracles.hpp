#pragma once

// Reference implementations used only to audit the library: a one-sided
// Jacobi SVD, central finite differences and brute-force loops. None of
// these share code with the kernels they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;  // row-major, rows of equal length

/// Singular values (descending) by one-sided Jacobi rotations on columns.
inline std::vector<double> singular_values(Mat a) {
  const std::size_t m = a.size(), n = a.front().size();
  if (m < n) {  // work on the transpose so columns are the short side
    Mat t(n, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) t[j][i] = a[i][j];
    return singular_values(t);
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += a[i][p] * a[i][p];
          beta += a[i][q] * a[i][q];
          gamma += a[i][p] * a[i][q];
        }
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
        const double c = 1 / std::sqrt(1 + t * t), s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a[i][p], y = a[i][q];
          a[i][p] = c * x - s * y;
          a[i][q] = s * x + c * y;
        }
      }
    if (off < 1e-15) break;
  }
  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += a[i][j] * a[i][j];
    sv[j] = std::sqrt(s);
  }
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

/// ‖AᵀA − I‖_F (or AAᵀ when wide) by plain loops.
inline double gram_residual(const Mat& a) {
  const std::size_t m = a.size(), n = a.front().size();
  const bool tall = m >= n;
  const std::size_t k = tall ? n : m;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double g = 0.0;
      if (tall)
        for (std::size_t r = 0; r < m; ++r) g += a[r][i] * a[r][j];
      else
        for (std::size_t c = 0; c < n; ++c) g += a[i][c] * a[j][c];
      const double d = g - (i == j ? 1.0 : 0.0);
      s += d * d;
    }
  return std::sqrt(s);
}

/// Central difference of a scalar function of one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

/// Relative error with an absolute floor, so tiny gradients are compared
/// in absolute terms.
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Exact W1 between equal-size uniform point sets by trying every
/// permutation (n ≤ 8).
inline double w1_brute_force(const Mat& p, const Mat& q) {
  const std::size_t n = p.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double cost = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double d = 0;
      for (std::size_t j = 0; j < p[i].size(); ++j) d += (p[i][j] - q[perm[i]][j]) * (p[i][j] - q[perm[i]][j]);
      cost += std::sqrt(d);
    }
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / double(n);
}

/// Best accuracy of "+1 iff f > T" over every candidate threshold (each
/// value, and ±infinity), counted directly.
inline double threshold_brute_force(const std::vector<double>& fp, const std::vector<double>& fq) {
  std::vector<double> cands{-INFINITY, INFINITY};
  cands.insert(cands.end(), fp.begin(), fp.end());
  cands.insert(cands.end(), fq.begin(), fq.end());
  double best = 0;
  for (double t : cands) {
    std::size_t ok = 0;
    for (double v : fp) ok += v > t;
    for (double v : fq) ok += v <= t;
    best = std::max(best, double(ok) / double(fp.size() + fq.size()));
  }
  return best;
}

/// Distance from x to a closed polygon by dense sampling of its edges.
inline double polygon_distance_sampled(const std::vector<std::pair<double, double>>& v, double x, double y,
                                       int samples_per_edge = 20000) {
  double best = INFINITY;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto [ax, ay] = v[i];
    const auto [bx, by] = v[(i + 1) % v.size()];
    for (int s = 0; s <= samples_per_edge; ++s) {
      const double t = double(s) / samples_per_edge;
      best = std::min(best, std::hypot(ax + t * (bx - ax) - x, ay + t * (by - ay) - y));
    }
  }
  return best;
}

}  // namespace oracle
