#pragma once

// Certificates, mean certifiable robustness, the L2 PGD attack and
// robust-accuracy evaluation. Everything is generic over a score model so
// the same code audits trained networks and exact geometric oracles.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "lipcert/data.hpp"
#include "lipcert/error.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/losses.hpp"
#include "lipcert/net.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {

/// Anything that maps a batch of points to logits and can backpropagate an
/// upstream gradient to its inputs. `lipschitz_certified()` says whether
/// the map is guaranteed 1-Lipschitz (certificates are refused otherwise).
template <typename M>
concept ScoreModel = requires(const M& m, const Matrix& x) {
  { m.logits(x) } -> std::convertible_to<Matrix>;
  { m.input_gradient(x, x) } -> std::convertible_to<Matrix>;
  { m.output_dim() } -> std::convertible_to<std::size_t>;
  { m.lipschitz_certified() } -> std::convertible_to<bool>;
};

/// Non-owning adapter exposing a LipNet as a ScoreModel.
class NetModel {
 public:
  explicit NetModel(const LipNet& net) : net_(&net) {}

  Matrix logits(const Matrix& x) const { return forward(*net_, x); }
  Matrix input_gradient(const Matrix& x, const Matrix& upstream) const {
    return lipcert::input_gradient(*net_, x, upstream);
  }
  std::size_t output_dim() const { return net_->output_dim(); }
  bool lipschitz_certified() const { return net_->mode() == Mode::Constrained; }
  const LipNet& net() const { return *net_; }

 private:
  const LipNet* net_;
};

// ---------------------------------------------------------------------------
// Predictions and certificates

/// sign(f) with sign(0) = +1.
inline int predict_binary(double logit) { return logit >= 0.0 ? 1 : -1; }

/// Arg-max, lowest index on ties.
inline std::size_t predict_class(std::span<const double> logits) {
  return std::size_t(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

/// Predicted label of one row: ±1 for scalar outputs, class index otherwise.
inline int predict(std::span<const double> logits) {
  return logits.size() == 1 ? predict_binary(logits[0]) : int(predict_class(logits));
}

/// Signed margin toward `label`: y·f for scalar outputs, f_k − max_{i≠k} f_i otherwise.
inline double signed_margin(std::span<const double> logits, int label) {
  if (logits.size() == 1) return double(label) * logits[0];
  return class_margin(logits, std::size_t(label));
}

/// Half the gap between the top two logits (0 when tied).
inline double multiclass_certificate(std::span<const double> logits, std::size_t k) {
  require(k < logits.size(), ErrorCode::BadClassIndex, "class index out of range");
  const double top = *std::max_element(logits.begin(), logits.end());
  require(logits[k] == top, ErrorCode::NotArgmax, "class " + std::to_string(k) + " is not the arg-max");
  return std::max(0.0, 0.5 * class_margin(logits, k));
}

/// Robustness radius guaranteed at a point with these logits.
inline double certificate_radius(std::span<const double> logits) {
  if (logits.size() == 1) return std::abs(logits[0]);
  return multiclass_certificate(logits, predict_class(logits));
}

struct Certificate {
  Vector point;
  int predicted = 1;
  double radius = 0.0;
};

template <ScoreModel M>
Certificate binary_certificate(const M& model, std::span<const double> x) {
  require(model.lipschitz_certified(), ErrorCode::UnconstrainedNet,
          "certificates need a 1-Lipschitz model");
  require(model.output_dim() == 1, ErrorCode::ShapeMismatch, "binary certificate needs a scalar output");
  const double f = model.logits(Matrix::row_vector(x))(0, 0);
  return {Vector(x.begin(), x.end()), predict_binary(f), std::abs(f)};
}

inline Certificate binary_certificate(const LipNet& net, std::span<const double> x) {
  return binary_certificate(NetModel(net), x);
}

/// Certificate radius for every row of `x`.
template <ScoreModel M>
Vector certificates(const M& model, const Matrix& x) {
  require(model.lipschitz_certified(), ErrorCode::UnconstrainedNet, "certificates need a 1-Lipschitz model");
  const Matrix logits = model.logits(x);
  Vector out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = certificate_radius(logits.row(i));
  return out;
}

// ---------------------------------------------------------------------------
// Mean certifiable robustness

/// Sample mean of y·f(x) over a binary dataset.
template <ScoreModel M>
double mcr(const M& model, const LabeledDataset& data) {
  require(data.kind == LabelKind::Binary, ErrorCode::InvalidArgument, "mcr needs binary labels");
  require(model.output_dim() == 1, ErrorCode::ShapeMismatch, "mcr needs a scalar-output model");
  const Matrix f = model.logits(data.points);
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += double(data.labels[i]) * f(i, 0);
  return s / double(data.size());
}

inline double mcr(const LipNet& net, const LabeledDataset& data) { return mcr(NetModel(net), data); }

/// Same quantity through its two-term form: mass of |f| on correctly
/// signed points minus mass on wrongly signed points.
template <ScoreModel M>
double mcr_two_term(const M& model, const LabeledDataset& data) {
  const Matrix f = model.logits(data.points);
  double correct = 0.0, wrong = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double yf = double(data.labels[i]) * f(i, 0);
    if (yf > 0.0) correct += std::abs(f(i, 0));
    else if (yf < 0.0) wrong += std::abs(f(i, 0));
  }
  return (correct - wrong) / double(data.size());
}

/// Sample mean of f_k(x) − max_{i≠k} f_i(x) over a multiclass dataset.
template <ScoreModel M>
double mmcr(const M& model, const LabeledDataset& data) {
  require(data.kind == LabelKind::Multiclass, ErrorCode::InvalidArgument, "mmcr needs class-index labels");
  const Matrix f = model.logits(data.points);
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += class_margin(f.row(i), std::size_t(data.labels[i]));
  return s / double(data.size());
}

inline double mmcr(const LipNet& net, const LabeledDataset& data) { return mmcr(NetModel(net), data); }

/// mcr or mmcr depending on the label kind.
template <ScoreModel M>
double mean_certifiable_robustness(const M& model, const LabeledDataset& data) {
  return data.kind == LabelKind::Binary ? mcr(model, data) : mmcr(model, data);
}

template <ScoreModel M>
double accuracy(const M& model, const LabeledDataset& data) {
  const Matrix f = model.logits(data.points);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += predict(f.row(i)) == data.labels[i];
  return double(hits) / double(data.size());
}

/// Mean certificate radius over all points, right or wrong.
template <ScoreModel M>
double average_certificate(const M& model, const LabeledDataset& data) {
  const Vector r = certificates(model, data.points);
  double s = 0.0;
  for (double v : r) s += v;
  return s / double(r.size());
}

// ---------------------------------------------------------------------------
// L2 PGD

struct PgdSettings {
  std::size_t steps = 200;
  double step_factor = 2.5;  // step size = step_factor · eps / steps
  std::size_t restarts = 3;
  std::uint64_t seed = 0;
};

struct AttackResult {
  bool found = false;
  Vector perturbation;
  double norm = 0.0;
  std::size_t steps_used = 0;
};

/// Batched L2 PGD. Row i is attacked within radius eps[i] (eps[i] ≤ 0
/// skips the row). Each step descends the signed margin of `labels[i]`,
/// is normalized to the step size and projected back onto the ball.
/// A row is reported found as soon as an iterate changes its prediction.
/// Restart 0 starts at the clean point; later restarts start at a
/// uniformly drawn point of the ball from a per-restart stream.
template <ScoreModel M>
std::vector<AttackResult> pgd_l2_batch(const M& model, const Matrix& x, std::span<const int> labels,
                                       std::span<const double> eps, const PgdSettings& s = {}) {
  const std::size_t n = x.rows(), d = x.cols(), k = model.output_dim();
  require(labels.size() == n && eps.size() == n, ErrorCode::ShapeMismatch, "pgd batch size mismatch");
  std::vector<AttackResult> results(n);
  if (n == 0) return results;

  const Matrix clean_logits = model.logits(x);
  std::vector<int> clean_pred(n);
  for (std::size_t i = 0; i < n; ++i) clean_pred[i] = predict(clean_logits.row(i));

  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, s.restarts); ++restart) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i)
      if (!results[i].found && eps[i] > 0.0) active.push_back(i);
    if (active.empty()) break;

    Rng rng(Rng::derive(s.seed, restart));
    Matrix delta(active.size(), d);
    if (restart > 0) {
      for (std::size_t a = 0; a < active.size(); ++a) {
        auto row = delta.row(a);
        for (double& v : row) v = rng.normal();
        const double nr = norm2(row);
        const double radius = eps[active[a]] * std::pow(rng.uniform(), 1.0 / double(d));
        for (double& v : row) v *= nr > 0.0 ? radius / nr : 0.0;
      }
    }

    auto current_points = [&]() {
      Matrix p(active.size(), d);
      for (std::size_t a = 0; a < active.size(); ++a)
        for (std::size_t j = 0; j < d; ++j) p(a, j) = x(active[a], j) + delta(a, j);
      return p;
    };
    std::vector<char> done(active.size(), 0);
    auto check_flips = [&](const Matrix& logits, std::size_t step) {
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (done[a]) continue;
        const std::size_t i = active[a];
        if (predict(logits.row(a)) != clean_pred[i]) {
          done[a] = 1;
          auto& r = results[i];
          r.found = true;
          r.perturbation.assign(delta.row(a).begin(), delta.row(a).end());
          r.norm = norm2(r.perturbation);
          r.steps_used = step;
        }
      }
    };

    Matrix pts = current_points();
    Matrix logits = model.logits(pts);
    check_flips(logits, 0);
    for (std::size_t step = 1; step <= s.steps; ++step) {
      Matrix upstream(active.size(), k);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const int y = labels[active[a]];
        if (k == 1) {
          upstream(a, 0) = double(y);
        } else {
          const auto row = logits.row(a);
          upstream(a, std::size_t(y)) = 1.0;
          upstream(a, detail::strongest_competitor(row, std::size_t(y))) = -1.0;
        }
      }
      const Matrix grad = model.input_gradient(pts, upstream);
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (done[a]) continue;
        const double e = eps[active[a]];
        const double step_size = s.step_factor * e / double(s.steps);
        const auto g = grad.row(a);
        const double gn = norm2(g);
        auto dr = delta.row(a);
        if (gn > 0.0)
          for (std::size_t j = 0; j < d; ++j) dr[j] -= step_size * g[j] / gn;
        const double dn = norm2(dr);
        if (dn > e)
          for (double& v : dr) v *= e / dn;
      }
      pts = current_points();
      logits = model.logits(pts);
      check_flips(logits, step);
      if (std::all_of(done.begin(), done.end(), [](char c) { return c != 0; })) break;
    }
  }
  return results;
}

template <ScoreModel M>
AttackResult pgd_l2(const M& model, std::span<const double> x, int label, double eps, const PgdSettings& s = {}) {
  require(eps > 0.0, ErrorCode::InvalidArgument, "pgd_l2 needs eps > 0");
  const int labels[1] = {label};
  const double radii[1] = {eps};
  return pgd_l2_batch(model, Matrix::row_vector(x), labels, radii, s).front();
}

inline AttackResult pgd_l2(const LipNet& net, std::span<const double> x, int label, double eps,
                           const PgdSettings& s = {}) {
  return pgd_l2(NetModel(net), x, label, eps, s);
}

// ---------------------------------------------------------------------------
// Robust accuracy

enum class RobustMode { Certified, Empirical };

template <ScoreModel M>
double robust_accuracy(const M& model, const LabeledDataset& data, double eps, RobustMode mode,
                       const PgdSettings& s = {}) {
  require(eps >= 0.0, ErrorCode::InvalidArgument, "robust_accuracy needs eps >= 0");
  const Matrix logits = model.logits(data.points);
  std::vector<std::size_t> correct;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predict(logits.row(i)) == data.labels[i]) correct.push_back(i);
  if (eps == 0.0) return double(correct.size()) / double(data.size());

  std::size_t robust = 0;
  if (mode == RobustMode::Certified) {
    require(model.lipschitz_certified(), ErrorCode::UnconstrainedNet, "certified accuracy needs a 1-Lipschitz model");
    for (std::size_t i : correct) robust += certificate_radius(logits.row(i)) >= eps;
  } else {
    const LabeledDataset sub = data.subset(correct);
    const Vector radii(sub.size(), eps);
    const auto attacks = pgd_l2_batch(model, sub.points, sub.labels, radii, s);
    for (const auto& a : attacks) robust += !a.found;
  }
  return double(robust) / double(data.size());
}

// ---------------------------------------------------------------------------
// Bias balancing

/// Z^p(T) − Z^q(T): mean over P of σ(−(f−T)) minus mean over Q of σ(f−T).
/// Strictly increasing in T.
inline double balance_gap(std::span<const double> f_p, std::span<const double> f_q, double t) {
  double zp = 0.0, zq = 0.0;
  for (double f : f_p) zp += sigmoid(-(f - t));
  for (double f : f_q) zq += sigmoid(f - t);
  return zp / double(f_p.size()) - zq / double(f_q.size());
}

/// Threshold T equalizing the weighted false-negative and false-positive
/// rates, by bisection on a bracket grown geometrically from
/// [min f − 1, max f + 1].
inline double balance_bias(std::span<const double> f_p, std::span<const double> f_q, double tol) {
  require(!f_p.empty() && !f_q.empty(), ErrorCode::InvalidArgument, "balance_bias needs both classes");
  require(tol > 0.0, ErrorCode::InvalidArgument, "balance_bias needs tol > 0");
  double lo = std::min(*std::min_element(f_p.begin(), f_p.end()), *std::min_element(f_q.begin(), f_q.end())) - 1.0;
  double hi = std::max(*std::max_element(f_p.begin(), f_p.end()), *std::max_element(f_q.begin(), f_q.end())) + 1.0;
  double g_lo = balance_gap(f_p, f_q, lo), g_hi = balance_gap(f_p, f_q, hi);
  for (int grow = 0; grow < 64 && !(g_lo <= 0.0 && g_hi >= 0.0); ++grow) {
    const double width = hi - lo;
    if (g_lo > 0.0) lo -= width, g_lo = balance_gap(f_p, f_q, lo);
    if (g_hi < 0.0) hi += width, g_hi = balance_gap(f_p, f_q, hi);
  }
  require(g_lo <= 0.0 && g_hi >= 0.0, ErrorCode::NoBracket, "balance gap never changes sign");
  if (std::abs(g_lo) <= tol) return lo;
  if (std::abs(g_hi) <= tol) return hi;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = balance_gap(f_p, f_q, mid);
    if (std::abs(g) <= tol || mid == lo || mid == hi) return mid;
    (g < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

template <ScoreModel M>
double balance_bias(const M& model, const Matrix& p, const Matrix& q, double tol) {
  require(p.rows() > 0 && q.rows() > 0, ErrorCode::InvalidArgument, "balance_bias needs both classes");
  require(model.output_dim() == 1, ErrorCode::ShapeMismatch, "balance_bias needs a scalar-output model");
  const Matrix fp = model.logits(p), fq = model.logits(q);
  return balance_bias(fp.data(), fq.data(), tol);
}

inline double balance_bias(const LipNet& net, const Matrix& p, const Matrix& q, double tol) {
  return balance_bias(NetModel(net), p, q, tol);
}

}  // namespace lipcert
