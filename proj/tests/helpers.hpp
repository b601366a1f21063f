#pragma once

#include <lipcert/lipcert.hpp>

#include "oracles.hpp"

namespace testutil {

inline lipcert::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
  lipcert::Rng rng(seed);
  lipcert::Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

inline oracle::Mat to_rows(const lipcert::Matrix& m) {
  oracle::Mat out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline lipcert::DenseLayer dense(lipcert::Matrix w, lipcert::Vector b,
                                 lipcert::Constraint c = lipcert::Constraint::Orthogonal) {
  return lipcert::DenseLayer{std::move(w), std::move(b), c};
}

/// Largest |f(x) − f(z)| / ‖x − z‖ over random pairs in [−lo, lo]^d.
template <typename F>
double max_pair_slope(F&& f, std::size_t dim, std::size_t pairs, std::uint64_t seed, double box = 2.0) {
  lipcert::Rng rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    lipcert::Vector x(dim), z(dim);
    for (auto& v : x) v = rng.uniform(-box, box);
    for (auto& v : z) v = rng.uniform(-box, box);
    const double d = lipcert::distance(x, z);
    if (d == 0.0) continue;
    worst = std::max(worst, std::abs(f(x) - f(z)) / d);
  }
  return worst;
}

}  // namespace testutil
