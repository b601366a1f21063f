#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <variant>

#include "lipcert/error.hpp"
#include "lipcert/linalg.hpp"

namespace lipcert {

// ---------------------------------------------------------------------------
// Loss specification

struct BceTau { double tau = 1.0; };
struct CceTau { double tau = 1.0; };
struct HingeM { double m = 1.0; };
struct Wass {};
struct Hkr { double alpha = 1.0; double m = 1.0; };
struct MulticlassHkr { double alpha = 1.0; double m = 1.0; };
/// Squared error against regression targets (SDF fitting only).
struct Mse {};

using LossSpec = std::variant<BceTau, CceTau, HingeM, Wass, Hkr, MulticlassHkr, Mse>;

inline bool is_multiclass(const LossSpec& spec) {
  return std::holds_alternative<CceTau>(spec) || std::holds_alternative<MulticlassHkr>(spec);
}

inline bool is_regression(const LossSpec& spec) { return std::holds_alternative<Mse>(spec); }

inline void validate(const LossSpec& spec) {
  std::visit(
      [](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BceTau> || std::is_same_v<S, CceTau>) {
          require(s.tau > 0.0 && std::isfinite(s.tau), ErrorCode::InvalidArgument, "tau must be > 0");
        } else if constexpr (std::is_same_v<S, HingeM>) {
          require(s.m > 0.0 && std::isfinite(s.m), ErrorCode::InvalidArgument, "margin m must be > 0");
        } else if constexpr (std::is_same_v<S, Hkr> || std::is_same_v<S, MulticlassHkr>) {
          require(s.alpha >= 0.0 && std::isfinite(s.alpha), ErrorCode::InvalidArgument, "alpha must be >= 0");
          require(s.m > 0.0 && std::isfinite(s.m), ErrorCode::InvalidArgument, "margin m must be > 0");
        }
      },
      spec);
}

/// Short human-readable label, e.g. "hkr(alpha=10,m=1)".
inline std::string describe(const LossSpec& spec) {
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  return std::visit(
      [&](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BceTau>) return "bce(tau=" + num(s.tau) + ")";
        else if constexpr (std::is_same_v<S, CceTau>) return "cce(tau=" + num(s.tau) + ")";
        else if constexpr (std::is_same_v<S, HingeM>) return "hinge(m=" + num(s.m) + ")";
        else if constexpr (std::is_same_v<S, Wass>) return "wass";
        else if constexpr (std::is_same_v<S, Hkr>) return "hkr(alpha=" + num(s.alpha) + ",m=" + num(s.m) + ")";
        else if constexpr (std::is_same_v<S, MulticlassHkr>)
          return "mhkr(alpha=" + num(s.alpha) + ",m=" + num(s.m) + ")";
        else return "mse";
      },
      spec);
}

// ---------------------------------------------------------------------------
// Scalar losses. Labels are ±1.

struct LossValue {
  double value = 0.0;
  double dlogit = 0.0;
};

struct MultiLossValue {
  double value = 0.0;
  Vector dlogits;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + eᶻ) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

/// −log σ(y·τ·logit)
inline LossValue bce_tau(double logit, int y, double tau) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "bce_tau needs tau > 0");
  const double z = double(y) * (tau * logit);
  return {softplus(-z), -double(y) * tau * sigmoid(-z)};
}

/// max(0, m − y·logit); subgradient 0 at the kink.
inline LossValue hinge_m(double logit, int y, double m) {
  require(m > 0.0, ErrorCode::InvalidArgument, "hinge_m needs m > 0");
  const double slack = m - double(y) * logit;
  return slack > 0.0 ? LossValue{slack, -double(y)} : LossValue{0.0, 0.0};
}

inline LossValue wass_loss(double logit, int y) { return {-double(y) * logit, -double(y)}; }

/// Wasserstein term plus alpha-weighted hinge.
inline LossValue hkr(double logit, int y, double alpha, double m) {
  require(alpha >= 0.0, ErrorCode::InvalidArgument, "hkr needs alpha >= 0");
  const LossValue w = wass_loss(logit, y);
  if (alpha == 0.0) return w;
  const LossValue h = hinge_m(logit, y, m);
  return {w.value + alpha * h.value, w.dlogit + alpha * h.dlogit};
}

// ---------------------------------------------------------------------------
// Multiclass losses. Classes are 0-based indices.

namespace detail {

inline void check_class(std::span<const double> logits, std::size_t k) {
  require(logits.size() >= 2, ErrorCode::ShapeMismatch, "multiclass loss needs at least 2 logits");
  require(k < logits.size(), ErrorCode::BadClassIndex,
          "class " + std::to_string(k) + " out of range for " + std::to_string(logits.size()) + " logits");
}

/// Highest logit other than k; lowest index wins ties.
inline std::size_t strongest_competitor(std::span<const double> logits, std::size_t k) {
  std::size_t best = k == 0 ? 1 : 0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (i != k && logits[i] > logits[best]) best = i;
  return best;
}

}  // namespace detail

/// Top-class margin f_k − max_{i≠k} f_i.
inline double class_margin(std::span<const double> logits, std::size_t k) {
  detail::check_class(logits, k);
  return logits[k] - logits[detail::strongest_competitor(logits, k)];
}

inline MultiLossValue multiclass_hkr(std::span<const double> logits, std::size_t k, double alpha, double m) {
  detail::check_class(logits, k);
  require(alpha >= 0.0, ErrorCode::InvalidArgument, "multiclass_hkr needs alpha >= 0");
  require(m > 0.0, ErrorCode::InvalidArgument, "multiclass_hkr needs m > 0");
  const std::size_t j = detail::strongest_competitor(logits, k);
  const double r = logits[k] - logits[j];
  const bool active = alpha > 0.0 && m - r > 0.0;
  MultiLossValue out;
  out.value = -r + (active ? alpha * (m - r) : 0.0);
  const double d_r = -1.0 - (active ? alpha : 0.0);
  out.dlogits.assign(logits.size(), 0.0);
  out.dlogits[k] = d_r;
  out.dlogits[j] = -d_r;
  return out;
}

/// −log softmax(τ·logits)[k]
inline MultiLossValue cce_tau(std::span<const double> logits, std::size_t k, double tau) {
  detail::check_class(logits, k);
  require(tau > 0.0, ErrorCode::InvalidArgument, "cce_tau needs tau > 0");
  Vector s(logits.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = tau * logits[i];
  const double top = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += std::exp(v - top);
  const double lse = top + std::log(sum);
  MultiLossValue out;
  out.value = lse - s[k];
  out.dlogits.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    out.dlogits[i] = tau * (std::exp(s[i] - lse) - (i == k ? 1.0 : 0.0));
  return out;
}

// ---------------------------------------------------------------------------

/// (4/τ)·(E[bce_τ] − log 2) + (mean_P f − mean_Q f), with both classes
/// weighted equally. Tends to 0 as τ → 0.
inline double small_tau_limit_check(std::span<const double> f_p, std::span<const double> f_q, double tau) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "small_tau_limit_check needs tau > 0");
  require(!f_p.empty() && !f_q.empty(), ErrorCode::InvalidArgument, "both classes need values");
  double bce_p = 0.0, bce_q = 0.0, mean_p = 0.0, mean_q = 0.0;
  for (double f : f_p) bce_p += bce_tau(f, +1, tau).value, mean_p += f;
  for (double f : f_q) bce_q += bce_tau(f, -1, tau).value, mean_q += f;
  bce_p /= double(f_p.size());
  bce_q /= double(f_q.size());
  mean_p /= double(f_p.size());
  mean_q /= double(f_q.size());
  const double expected_bce = 0.5 * (bce_p + bce_q);
  return 4.0 / tau * (expected_bce - std::numbers::ln2) + (mean_p - mean_q);
}

}  // namespace lipcert
