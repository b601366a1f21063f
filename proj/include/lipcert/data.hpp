#pragma once

// Labeled point sets and the synthetic tasks used by the experiments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lipcert/error.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {

enum class LabelKind { Binary, Multiclass };

/// Points (one per row) with labels: ±1 for binary tasks, 0..K-1 for
/// multiclass tasks. `targets` is either empty or one value per point.
struct LabeledDataset {
  Matrix points;
  std::vector<int> labels;
  Vector targets;
  LabelKind kind = LabelKind::Binary;
  std::size_t num_classes = 2;

  std::size_t size() const { return points.rows(); }
  std::size_t dim() const { return points.cols(); }
  bool has_targets() const { return !targets.empty(); }

  void validate() const {
    require(points.rows() > 0 && points.cols() > 0, ErrorCode::ShapeMismatch, "dataset is empty");
    require(labels.size() == points.rows(), ErrorCode::ShapeMismatch, "one label per point required");
    require(targets.empty() || targets.size() == points.rows(), ErrorCode::ShapeMismatch,
            "one regression target per point required");
    require(all_finite(points.data()), ErrorCode::InvalidArgument, "non-finite coordinate in dataset");
    for (int y : labels) {
      if (kind == LabelKind::Binary)
        require(y == 1 || y == -1, ErrorCode::BadClassIndex, "binary labels must be +1 or -1");
      else
        require(y >= 0 && std::size_t(y) < num_classes, ErrorCode::BadClassIndex,
                "class label " + std::to_string(y) + " out of range");
    }
  }

  LabeledDataset subset(std::span<const std::size_t> idx) const {
    LabeledDataset out;
    out.kind = kind;
    out.num_classes = num_classes;
    out.points = Matrix(idx.size(), dim());
    out.labels.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto src = points.row(idx[i]);
      std::copy(src.begin(), src.end(), out.points.row(i).begin());
      out.labels.push_back(labels[idx[i]]);
      if (has_targets()) out.targets.push_back(targets[idx[i]]);
    }
    return out;
  }

  /// Points of one binary class (+1 → P, −1 → Q).
  Matrix class_points(int label) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < size(); ++i)
      if (labels[i] == label) idx.push_back(i);
    return subset(idx).points;
  }
};

/// First ⌈fraction·n⌉ points of a seeded shuffle; different fractions of
/// one seed are nested.
inline LabeledDataset fraction_slice(const LabeledDataset& data, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::InvalidArgument, "fraction must lie in (0, 1]");
  Rng rng(seed);
  auto perm = rng.permutation(data.size());
  const auto keep = std::max<std::size_t>(1, std::size_t(std::ceil(fraction * double(data.size()) - 1e-9)));
  perm.resize(keep);
  return data.subset(perm);
}

inline LabeledDataset first_n(const LabeledDataset& data, std::size_t n) {
  std::vector<std::size_t> idx(std::min(n, data.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return data.subset(idx);
}

/// Binary ±1 dataset recoded as two classes: +1 → 0, −1 → 1.
inline LabeledDataset to_two_class(const LabeledDataset& data) {
  require(data.kind == LabelKind::Binary, ErrorCode::InvalidArgument, "to_two_class expects binary labels");
  LabeledDataset out = data;
  out.kind = LabelKind::Multiclass;
  out.num_classes = 2;
  for (int& y : out.labels) y = y == 1 ? 0 : 1;
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic tasks

/// Interleaved half circles; even indices are +1 (upper moon).
inline LabeledDataset two_moons(std::size_t n, double noise, std::uint64_t seed) {
  require(n >= 2, ErrorCode::InvalidArgument, "two_moons needs n >= 2");
  Rng rng(seed);
  LabeledDataset d;
  d.points = Matrix(n, 2);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::numbers::pi * rng.uniform();
    const bool upper = i % 2 == 0;
    double x = upper ? std::cos(t) : 1.0 - std::cos(t);
    double y = upper ? std::sin(t) : 0.5 - std::sin(t);
    x += noise * rng.normal();
    y += noise * rng.normal();
    // center roughly on the origin
    d.points(i, 0) = x - 0.5;
    d.points(i, 1) = y - 0.25;
    d.labels[i] = upper ? 1 : -1;
  }
  return d;
}

/// Layout of the two-class, two-mode mixture. Each class has a heavy mode
/// (weight 0.9) and a light mode (weight 0.1); the light mode sits inside
/// the other class's heavy region, `minority_offset` away from its center.
struct GaussianMixtureLayout {
  double major_x = 1.0;           // heavy modes at (−major_x, 0) for +1, (+major_x, 0) for −1
  double major_std = 0.35;
  double minority_offset = 0.8;   // light +1 mode at (+major_x, +offset), light −1 at (−major_x, −offset)
  double minority_std = 0.1;
  double minority_weight = 0.1;

  std::array<double, 2> major_center(int label) const { return {label == 1 ? -major_x : major_x, 0.0}; }
  std::array<double, 2> minority_center(int label) const {
    return label == 1 ? std::array<double, 2>{major_x, minority_offset}
                      : std::array<double, 2>{-major_x, -minority_offset};
  }
};

struct GaussianMixtureSample {
  LabeledDataset data;
  std::vector<int> minority;  // 1 if drawn from the light mode
};

inline GaussianMixtureSample gaussian_mixture_sample(std::uint64_t seed, std::size_t n = 2000,
                                                     const GaussianMixtureLayout& layout = {}) {
  require(n >= 2, ErrorCode::InvalidArgument, "gaussian_mixture_task needs n >= 2");
  Rng rng(seed);
  GaussianMixtureSample s;
  s.data.points = Matrix(n, 2);
  s.data.labels.resize(n);
  s.minority.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    const bool light = rng.uniform() < layout.minority_weight;
    const auto c = light ? layout.minority_center(label) : layout.major_center(label);
    const double sd = light ? layout.minority_std : layout.major_std;
    s.data.points(i, 0) = c[0] + sd * rng.normal();
    s.data.points(i, 1) = c[1] + sd * rng.normal();
    s.data.labels[i] = label;
    s.minority[i] = light ? 1 : 0;
  }
  return s;
}

inline LabeledDataset gaussian_mixture_task(std::uint64_t seed, std::size_t n = 2000,
                                            const GaussianMixtureLayout& layout = {}) {
  return gaussian_mixture_sample(seed, n, layout).data;
}

/// {(−1, −1), (+1, +1)} on the real line.
inline LabeledDataset linear_pair_task() {
  LabeledDataset d;
  d.points = Matrix(2, 1, Vector{-1.0, 1.0});
  d.labels = {-1, 1};
  return d;
}

/// `n` points in the unit square with pairwise distance ≥ `min_sep`
/// (rejection sampling) and i.i.d. uniform ±1 labels.
inline LabeledDataset random_label_task(std::size_t n, double min_sep, std::uint64_t seed,
                                        std::size_t retry_budget = 200000) {
  require(n >= 2, ErrorCode::InvalidArgument, "random_label_task needs n >= 2");
  require(min_sep > 0.0, ErrorCode::InvalidArgument, "random_label_task needs min_sep > 0");
  Rng rng(seed);
  std::vector<std::array<double, 2>> pts;
  pts.reserve(n);
  std::size_t attempts = 0;
  while (pts.size() < n) {
    if (attempts++ >= retry_budget)
      fail(ErrorCode::Unsatisfiable, "placed only " + std::to_string(pts.size()) + " of " + std::to_string(n) +
                                         " points at separation " + std::to_string(min_sep) + " after " +
                                         std::to_string(retry_budget) + " draws");
    const std::array<double, 2> p{rng.uniform(), rng.uniform()};
    const bool ok = std::all_of(pts.begin(), pts.end(), [&](const auto& q) {
      return std::hypot(p[0] - q[0], p[1] - q[1]) >= min_sep;
    });
    if (ok) pts.push_back(p);
  }
  LabeledDataset d;
  d.points = Matrix(n, 2);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.points(i, 0) = pts[i][0];
    d.points(i, 1) = pts[i][1];
    d.labels[i] = rng.uniform() < 0.5 ? 1 : -1;
  }
  return d;
}

}  // namespace lipcert
