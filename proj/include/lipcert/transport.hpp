#pragma once

// Exact Wasserstein-1 oracles, the Kantorovich-Rubinstein dual estimate of
// a potential, the Dirac-comb counter-example and packing-number bounds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/error.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/net.hpp"
#include "lipcert/robustness.hpp"

namespace lipcert {

/// Finite atoms with nonnegative weights summing to one.
struct DiscreteDist {
  std::vector<Vector> atoms;
  Vector weights;

  static DiscreteDist uniform(std::vector<Vector> atoms) {
    require(!atoms.empty(), ErrorCode::InvalidDistribution, "distribution needs at least one atom");
    DiscreteDist d;
    d.weights.assign(atoms.size(), 1.0 / double(atoms.size()));
    d.atoms = std::move(atoms);
    d.validate();
    return d;
  }

  static DiscreteDist uniform_1d(std::span<const double> xs) {
    std::vector<Vector> atoms;
    for (double x : xs) atoms.push_back({x});
    return uniform(std::move(atoms));
  }

  std::size_t size() const { return atoms.size(); }
  std::size_t dim() const { return atoms.empty() ? 0 : atoms.front().size(); }

  Matrix as_matrix() const {
    Matrix m(size(), dim());
    for (std::size_t i = 0; i < size(); ++i) std::copy(atoms[i].begin(), atoms[i].end(), m.row(i).begin());
    return m;
  }

  void validate() const {
    require(!atoms.empty(), ErrorCode::InvalidDistribution, "distribution needs at least one atom");
    require(weights.size() == atoms.size(), ErrorCode::InvalidDistribution, "one weight per atom required");
    const std::size_t d = atoms.front().size();
    require(d > 0, ErrorCode::InvalidDistribution, "atoms must have positive dimension");
    for (const auto& a : atoms) {
      require(a.size() == d, ErrorCode::InvalidDistribution, "atoms must share one dimension");
      require(all_finite(a), ErrorCode::InvalidDistribution, "non-finite atom coordinate");
    }
    double total = 0.0;
    for (double w : weights) {
      require(w >= 0.0 && std::isfinite(w), ErrorCode::InvalidDistribution, "weights must be nonnegative");
      total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidDistribution,
            "weights sum to " + std::to_string(total) + ", expected 1");
  }
};

/// ∫|F_P − F_Q| over the merged sorted support.
inline double w1_exact_1d(const DiscreteDist& p, const DiscreteDist& q) {
  p.validate();
  q.validate();
  require(p.dim() == 1 && q.dim() == 1, ErrorCode::InvalidDistribution, "w1_exact_1d needs scalar atoms");

  // equal-size uniform case: match sorted atoms (fewer rounding steps)
  auto uniform = [](const DiscreteDist& d) {
    return std::all_of(d.weights.begin(), d.weights.end(),
                       [&](double w) { return std::abs(w - 1.0 / double(d.size())) <= 1e-15; });
  };
  if (p.size() == q.size() && uniform(p) && uniform(q)) {
    Vector a, b;
    for (const auto& x : p.atoms) a.push_back(x[0]);
    for (const auto& x : q.atoms) b.push_back(x[0]);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return total / double(a.size());
  }

  std::vector<std::pair<double, double>> events;  // position, signed mass (P positive)
  events.reserve(p.size() + q.size());
  for (std::size_t i = 0; i < p.size(); ++i) events.emplace_back(p.atoms[i][0], p.weights[i]);
  for (std::size_t i = 0; i < q.size(); ++i) events.emplace_back(q.atoms[i][0], -q.weights[i]);
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double cdf_gap = 0.0, total = 0.0;
  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    cdf_gap += events[i].second;
    total += std::abs(cdf_gap) * (events[i + 1].first - events[i].first);
  }
  return total;
}

namespace detail {

/// Minimum-cost perfect matching on a square cost matrix (shortest
/// augmenting path with potentials, O(n³)). Returns assignment row → col.
inline std::vector<std::size_t> hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is the virtual start
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) minv[j] = cur, way[j] = j0;
        if (minv[j] < delta) delta = minv[j], j1 = j;
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) u[match[j]] += delta, v[j] -= delta;
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

inline constexpr std::size_t kMaxAssignmentAtoms = 64;

/// Exact W1 between two uniform distributions with the same number of
/// atoms, as an optimal assignment under euclidean cost.
inline double w1_exact_assignment(const DiscreteDist& p, const DiscreteDist& q) {
  p.validate();
  q.validate();
  const std::size_t n = p.size();
  require(q.size() == n, ErrorCode::UnsupportedWeights, "assignment oracle needs equal atom counts");
  require(n <= kMaxAssignmentAtoms, ErrorCode::UnsupportedWeights, "assignment oracle supports at most 64 atoms");
  require(p.dim() == q.dim(), ErrorCode::InvalidDistribution, "atom dimensions differ");
  for (const auto* d : {&p, &q})
    for (double w : d->weights)
      require(std::abs(w - 1.0 / double(n)) <= 1e-12, ErrorCode::UnsupportedWeights,
              "assignment oracle needs uniform weights");
  Matrix cost(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cost(i, j) = distance(p.atoms[i], q.atoms[j]);
  const auto match = detail::hungarian(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost(i, match[i]);
  return total / double(n);
}

/// Weighted mean of f over P minus weighted mean over Q.
template <ScoreModel M>
double kr_dual_estimate(const M& model, const DiscreteDist& p, const DiscreteDist& q) {
  require(model.lipschitz_certified(), ErrorCode::UnconstrainedNet, "dual estimate needs a 1-Lipschitz potential");
  require(model.output_dim() == 1, ErrorCode::ShapeMismatch, "potential must have a scalar output");
  p.validate();
  q.validate();
  const Matrix fp = model.logits(p.as_matrix()), fq = model.logits(q.as_matrix());
  double ep = 0.0, eq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) ep += p.weights[i] * fp(i, 0);
  for (std::size_t i = 0; i < q.size(); ++i) eq += q.weights[i] * fq(i, 0);
  return ep - eq;
}

inline double kr_dual_estimate(const LipNet& net, const DiscreteDist& p, const DiscreteDist& q) {
  return kr_dual_estimate(NetModel(net), p, q);
}

/// P = uniform on {4(i−1)}, Q = uniform on {4i−1}, i = 1..n.
inline std::pair<DiscreteDist, DiscreteDist> pathological_diracs(std::size_t n) {
  require(n >= 1, ErrorCode::InvalidArgument, "pathological_diracs needs n >= 1");
  Vector p, q;
  for (std::size_t i = 1; i <= n; ++i) {
    p.push_back(4.0 * double(i - 1));
    q.push_back(4.0 * double(i) - 1.0);
  }
  return {DiscreteDist::uniform_1d(p), DiscreteDist::uniform_1d(q)};
}

struct ThresholdResult {
  double threshold = 0.0;
  double accuracy = 0.0;
};

/// Best accuracy of "predict +1 iff f > T" over every distinct threshold:
/// below all values, midpoints of consecutive sorted values, above all.
/// Ties go to the smaller T.
inline ThresholdResult best_threshold_accuracy(std::span<const double> f_p, std::span<const double> f_q) {
  require(!f_p.empty() && !f_q.empty(), ErrorCode::InvalidArgument, "threshold scan needs both classes");
  std::vector<std::pair<double, int>> vals;
  vals.reserve(f_p.size() + f_q.size());
  for (double f : f_p) vals.emplace_back(f, 1);
  for (double f : f_q) vals.emplace_back(f, -1);
  std::sort(vals.begin(), vals.end());
  const double total = double(vals.size());

  // T below every value: every point predicted +1
  long correct = long(f_p.size());
  ThresholdResult best{vals.front().first - 1.0, double(correct) / total};
  for (std::size_t i = 0; i < vals.size();) {
    std::size_t j = i;
    while (j < vals.size() && vals[j].first == vals[i].first) {
      correct += vals[j].second == 1 ? -1 : 1;  // T passes this value: its prediction becomes −1
      ++j;
    }
    const double t = j < vals.size() ? 0.5 * (vals[i].first + vals[j].first) : vals.back().first + 1.0;
    const double acc = double(correct) / total;
    if (acc > best.accuracy) best = {t, acc};
    i = j;
  }
  return best;
}

struct PackingBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// (1/m)ⁿ·vol(X)/vol(B) and (3/m)ⁿ·vol(X)/vol(B).
inline PackingBounds packing_bounds(double m, std::size_t n, double vol_x, double vol_unit_ball) {
  require(m > 0.0, ErrorCode::InvalidArgument, "packing_bounds needs m > 0");
  require(vol_x > 0.0 && vol_unit_ball > 0.0, ErrorCode::InvalidArgument, "volumes must be positive");
  const double ratio = vol_x / vol_unit_ball;
  return {std::pow(1.0 / m, double(n)) * ratio, std::pow(3.0 / m, double(n)) * ratio};
}

}  // namespace lipcert
