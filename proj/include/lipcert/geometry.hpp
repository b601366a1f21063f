#pragma once

// Exact signed distance functions to polygonal decision boundaries in the
// plane, the Von Koch snowflake, and grid datasets built from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "lipcert/data.hpp"
#include "lipcert/error.hpp"
#include "lipcert/linalg.hpp"

namespace lipcert {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }

struct Segment {
  Point2 p;
  Point2 q;
};

/// Closest point of segment [p, q] to `x`.
inline Point2 closest_on_segment(const Segment& s, Point2 x) {
  const Point2 d = s.q - s.p;
  const double len2 = d.x * d.x + d.y * d.y;
  double t = ((x.x - s.p.x) * d.x + (x.y - s.p.y) * d.y) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return s.p + t * d;
}

inline double point_segment_distance(const Segment& s, Point2 x) { return norm(x - closest_on_segment(s, x)); }

/// Union of closed polygonal loops. Segment i belongs to loop loop_index[i];
/// each loop ends where it starts.
class PolylineBoundary {
 public:
  PolylineBoundary() = default;

  /// Each loop is given by its vertices; the closing edge back to the first
  /// vertex is added. A repeated final vertex is accepted and dropped.
  static PolylineBoundary from_loops(const std::vector<std::vector<Point2>>& loops) {
    PolylineBoundary b;
    for (std::size_t li = 0; li < loops.size(); ++li) {
      std::vector<Point2> v = loops[li];
      if (v.size() >= 2 && v.front() == v.back()) v.pop_back();
      require(v.size() >= 3, ErrorCode::InvalidBoundary, "loop " + std::to_string(li) + " needs >= 3 vertices");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Segment s{v[i], v[(i + 1) % v.size()]};
        require(norm(s.q - s.p) > 0.0, ErrorCode::InvalidBoundary,
                "zero-length segment in loop " + std::to_string(li));
        b.segments_.push_back(s);
        b.loop_index_.push_back(li);
      }
      b.loops_.push_back(std::move(v));
    }
    return b;
  }

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const std::vector<std::size_t>& loop_index() const noexcept { return loop_index_; }
  const std::vector<std::vector<Point2>>& loops() const noexcept { return loops_; }
  std::size_t loop_count() const noexcept { return loops_.size(); }
  bool empty() const noexcept { return segments_.empty(); }

  double perimeter() const {
    double s = 0.0;
    for (const auto& seg : segments_) s += norm(seg.q - seg.p);
    return s;
  }

  struct Nearest {
    double distance = std::numeric_limits<double>::infinity();
    Point2 point;
  };

  Nearest nearest(Point2 x) const {
    Nearest best;
    for (const auto& s : segments_) {
      const Point2 c = closest_on_segment(s, x);
      const double d = norm(x - c);
      if (d < best.distance) best = {d, c};
    }
    return best;
  }

  double distance(Point2 x) const { return nearest(x).distance; }

  /// Even-odd crossing test against a single loop.
  bool inside_loop(std::size_t loop, Point2 x) const {
    const auto& v = loops_[loop];
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      if ((v[i].y > x.y) != (v[j].y > x.y)) {
        const double cross_x = v[j].x + (x.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
        if (x.x < cross_x) inside = !inside;
      }
    }
    return inside;
  }

  /// Number of loops enclosing x.
  std::size_t depth(Point2 x) const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < loops_.size(); ++l) n += inside_loop(l, x);
    return n;
  }

 private:
  std::vector<Segment> segments_;
  std::vector<std::size_t> loop_index_;
  std::vector<std::vector<Point2>> loops_;
};

/// Assigns ±1 from the number of enclosing loops. By default odd depth is
/// the positive region, i.e. plain crossing parity.
struct RegionLabeler {
  std::set<std::size_t> positive_depths;  // empty means "odd depths"

  bool positive(const PolylineBoundary& b, Point2 x) const {
    const std::size_t d = b.depth(x);
    return positive_depths.empty() ? d % 2 == 1 : positive_depths.count(d) > 0;
  }
  int label(const PolylineBoundary& b, Point2 x) const { return positive(b, x) ? 1 : -1; }
};

// ---------------------------------------------------------------------------
// Signed distance

struct SdfQuery {
  double value = 0.0;  // signed distance
  Point2 nearest;      // closest boundary point
  int sign = 1;
};

inline SdfQuery sdf_query(const PolylineBoundary& b, const RegionLabeler& labeler, Point2 x) {
  const auto n = b.nearest(x);
  SdfQuery q;
  q.nearest = n.point;
  if (n.distance == 0.0) return q;
  q.sign = labeler.label(b, x);
  q.value = q.sign * n.distance;
  return q;
}

/// Distance to the boundary, positive on the labeler's positive region;
/// 0 on the boundary itself.
inline double signed_distance(const PolylineBoundary& b, const RegionLabeler& labeler, Point2 x) {
  return sdf_query(b, labeler, x).value;
}

/// Exact SDF as a score model: scalar logit, gradient sign·(x − nearest)/d,
/// and 1-Lipschitz by construction.
class SdfModel {
 public:
  SdfModel(const PolylineBoundary& b, RegionLabeler labeler) : boundary_(&b), labeler_(std::move(labeler)) {}

  Matrix logits(const Matrix& x) const {
    require(x.cols() == 2, ErrorCode::ShapeMismatch, "SDF model takes 2D points");
    Matrix out(x.rows(), 1);
    for (std::size_t i = 0; i < x.rows(); ++i) out(i, 0) = signed_distance(*boundary_, labeler_, {x(i, 0), x(i, 1)});
    return out;
  }

  Matrix input_gradient(const Matrix& x, const Matrix& upstream) const {
    Matrix g(x.rows(), 2);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto dir = gradient({x(i, 0), x(i, 1)});
      g(i, 0) = upstream(i, 0) * dir.x;
      g(i, 1) = upstream(i, 0) * dir.y;
    }
    return g;
  }

  /// Unit gradient of the SDF (zero on the boundary).
  Point2 gradient(Point2 p) const {
    const auto q = sdf_query(*boundary_, labeler_, p);
    const double d = std::abs(q.value);
    if (d == 0.0) return {};
    return (double(q.sign) / d) * (p - q.nearest);
  }

  std::size_t output_dim() const { return 1; }
  bool lipschitz_certified() const { return true; }

  const PolylineBoundary& boundary() const { return *boundary_; }
  const RegionLabeler& labeler() const { return labeler_; }

 private:
  const PolylineBoundary* boundary_;
  RegionLabeler labeler_;
};

// ---------------------------------------------------------------------------
// Multiclass

/// K regions partitioning the plane. Region k is the even-odd interior of
/// `regions[k]`; at most one region may have no loops and then stands for
/// everything not covered by the others.
struct RegionPartition {
  std::vector<PolylineBoundary> regions;

  std::size_t classes() const { return regions.size(); }

  /// Distance from x to region k (0 inside).
  double distance_to_region(std::size_t k, Point2 x) const {
    if (regions[k].empty()) {
      bool covered = false;
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < regions.size(); ++j) {
        if (j == k || regions[j].empty()) continue;
        if (regions[j].depth(x) % 2 == 1) {
          covered = true;
          d = std::min(d, regions[j].distance(x));
        }
      }
      return covered ? d : 0.0;
    }
    return regions[k].depth(x) % 2 == 1 ? 0.0 : regions[k].distance(x);
  }

  double boundary_distance(Point2 x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& r : regions)
      if (!r.empty()) d = std::min(d, r.distance(x));
    return d;
  }
};

/// Component k equals the distance to the boundary when x is strictly
/// closest to region k; every component is 0 on ties.
inline Vector multiclass_sdf(const RegionPartition& partition, Point2 x) {
  const std::size_t k = partition.classes();
  require(k >= 2, ErrorCode::InvalidArgument, "multiclass_sdf needs at least two regions");
  Vector dist(k);
  for (std::size_t i = 0; i < k; ++i) dist[i] = partition.distance_to_region(i, x);
  const auto best = std::size_t(std::min_element(dist.begin(), dist.end()) - dist.begin());
  Vector out(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    if (i != best && dist[i] == dist[best]) return out;
  out[best] = partition.boundary_distance(x);
  return out;
}

// ---------------------------------------------------------------------------
// Von Koch snowflake

/// Closed counter-clockwise loop with 3·4^iterations segments, starting
/// from the equilateral triangle inscribed in the unit circle and
/// replacing the middle third of every edge by an outward bump.
inline PolylineBoundary koch_snowflake(std::size_t iterations) {
  require(iterations <= 8, ErrorCode::InvalidArgument, "koch_snowflake supports at most 8 iterations");
  std::vector<Point2> v;
  for (int i = 0; i < 3; ++i) {
    const double a = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * i / 3.0;
    v.push_back({std::cos(a), std::sin(a)});
  }
  const double c = std::cos(-std::numbers::pi / 3.0), s = std::sin(-std::numbers::pi / 3.0);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::vector<Point2> next;
    next.reserve(v.size() * 4);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point2 p = v[i], q = v[(i + 1) % v.size()];
      const Point2 d = (1.0 / 3.0) * (q - p);
      const Point2 a = p + d;
      const Point2 peak = a + Point2{c * d.x - s * d.y, s * d.x + c * d.y};
      next.push_back(p);
      next.push_back(a);
      next.push_back(peak);
      next.push_back(p + 2.0 * d);
    }
    v = std::move(next);
  }
  return PolylineBoundary::from_loops({v});
}

struct BoundingBox {
  double x_min = -1.2, x_max = 1.2, y_min = -1.2, y_max = 1.2;
};

/// resolution² grid points spanning the box corners, each labeled with the
/// sign of the SDF (0 counts as +1) and carrying the SDF as target.
inline LabeledDataset sdf_grid_dataset(const PolylineBoundary& b, const RegionLabeler& labeler,
                                       std::size_t resolution, const BoundingBox& box = {}) {
  require(resolution >= 2, ErrorCode::InvalidArgument, "sdf_grid_dataset needs resolution >= 2");
  LabeledDataset d;
  const std::size_t n = resolution * resolution;
  d.points = Matrix(n, 2);
  d.labels.resize(n);
  d.targets.resize(n);
  const double step_x = (box.x_max - box.x_min) / double(resolution - 1);
  const double step_y = (box.y_max - box.y_min) / double(resolution - 1);
  for (std::size_t r = 0; r < resolution; ++r)
    for (std::size_t c = 0; c < resolution; ++c) {
      const std::size_t i = r * resolution + c;
      const Point2 p{box.x_min + double(c) * step_x, box.y_min + double(r) * step_y};
      const double sd = signed_distance(b, labeler, p);
      d.points(i, 0) = p.x;
      d.points(i, 1) = p.y;
      d.targets[i] = sd;
      d.labels[i] = sd >= 0.0 ? 1 : -1;
    }
  return d;
}

}  // namespace lipcert
