#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace lipcert;

namespace {

LipNet constant_net(double c) {
  return LipNet(Mode::Constrained, {testutil::dense(Matrix(1, 2), {c}, Constraint::SpectralNormOnly)});
}

LipNet linear_net(double ux, double uy, double b, Mode mode = Mode::Constrained) {
  return LipNet(mode, {testutil::dense(Matrix{{ux, uy}}, {b},
                                       mode == Mode::Constrained ? Constraint::SpectralNormOnly
                                                                 : Constraint::Unconstrained)});
}

PolylineBoundary unit_square() {
  return PolylineBoundary::from_loops({{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}});
}

LabeledDataset random_points(std::size_t n, std::uint64_t seed, double box = 1.5) {
  Rng rng(seed);
  LabeledDataset d;
  d.points = Matrix(n, 2);
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.points(i, 0) = rng.uniform(-box, box);
    d.points(i, 1) = rng.uniform(-box, box);
    d.labels[i] = rng.uniform() < 0.5 ? 1 : -1;
  }
  return d;
}

}  // namespace

TEST(Certificate, ZeroLogitHasZeroRadius) {
  const auto c = binary_certificate(linear_net(1, 0, 0), Vector{0.0, 5.0});
  EXPECT_EQ(c.radius, 0.0);
  EXPECT_EQ(c.predicted, 1);
}

TEST(Certificate, RefusesUnconstrainedNets) {
  try {
    binary_certificate(linear_net(1, 0, 0, Mode::Unconstrained), Vector{0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnconstrainedNet);
  }
}

TEST(Certificate, SdfRadiusIsBoundaryDistance) {
  const auto b = unit_square();
  const SdfModel sdf(b, {});
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const Vector x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    EXPECT_NEAR(binary_certificate(sdf, x).radius, b.distance({x[0], x[1]}), 1e-15);
  }
}

TEST(Certificate, MulticlassValues) {
  EXPECT_EQ(multiclass_certificate(Vector{2, 2, 0}, 0), 0.0);
  EXPECT_NEAR(multiclass_certificate(Vector{3, 1, 0}, 0), 1.0, 1e-15);
  EXPECT_NEAR(multiclass_certificate(Vector{0.2, 1.7}, 1), 0.75, 1e-15);
  try {
    multiclass_certificate(Vector{3, 1, 0}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotArgmax);
  }
}

TEST(Mcr, ConstantNetAndLabelFlip) {
  LabeledDataset d = random_points(50, 2);
  std::fill(d.labels.begin(), d.labels.end(), 1);
  EXPECT_NEAR(mcr(constant_net(0.37), d), 0.37, 1e-15);

  const LipNet net = make_network({{2, 16, 1}}, 3);
  LabeledDataset e = random_points(80, 4), flipped = e;
  for (int& y : flipped.labels) y = -y;
  EXPECT_NEAR(mcr(net, flipped), -mcr(net, e), 1e-15);
}

TEST(Mcr, TwoTermFormAgrees) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LipNet net = make_network({{2, 16, 16, 1}}, seed);
    const LabeledDataset d = random_points(200, 10 + seed);
    EXPECT_NEAR(mcr(net, d), mcr_two_term(NetModel(net), d), 1e-12);
  }
}

TEST(Mcr, SdfGridEqualsMeanAbsoluteDistance) {
  const auto b = koch_snowflake(2);
  const LabeledDataset grid = sdf_grid_dataset(b, {}, 40);
  double mean_abs = 0.0;
  for (double t : grid.targets) mean_abs += std::abs(t);
  mean_abs /= double(grid.size());
  EXPECT_NEAR(mcr(SdfModel(b, {}), grid), mean_abs, 1e-12);
}

TEST(Mmcr, TwoClassOneHotMatchesBinary) {
  const LipNet net2 = make_network({{2, 16, 2}}, 5);
  LabeledDataset d = random_points(100, 6);
  const LabeledDataset d2 = to_two_class(d);
  // f₁ − f₂ as a scalar net
  const Matrix f = forward(net2, d.points);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += d.labels[i] * (f(i, 0) - f(i, 1));
  EXPECT_NEAR(mmcr(net2, d2), s / double(d.size()), 1e-12);
}

TEST(Mmcr, EqualLogitsGiveZeroAndLoopOracle) {
  LipNet flat(Mode::Constrained, {testutil::dense(Matrix(3, 2), {0.4, 0.4, 0.4}, Constraint::SpectralNormOnly)});
  LabeledDataset d = random_points(30, 7);
  d.kind = LabelKind::Multiclass;
  d.num_classes = 3;
  for (std::size_t i = 0; i < d.size(); ++i) d.labels[i] = int(i % 3);
  EXPECT_EQ(mmcr(flat, d), 0.0);

  const LipNet net = make_network({{2, 16, 16, 3}}, 8);
  const Matrix f = forward(net, d.points);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t k = std::size_t(d.labels[i]);
    double other = -INFINITY;
    for (std::size_t j = 0; j < 3; ++j)
      if (j != k) other = std::max(other, f(i, j));
    s += f(i, k) - other;
  }
  EXPECT_NEAR(mmcr(net, d), s / double(d.size()), 1e-12);
}

TEST(Pgd, LinearNetFlipsAlongNormal) {
  const LipNet net = linear_net(0.6, 0.8, 0.0);
  const Vector x{0.3, 0.4};  // f(x) = 0.5
  const auto r = pgd_l2(net, x, 1, 0.6);
  ASSERT_TRUE(r.found);
  EXPECT_LE(r.norm, 0.6 + 1e-12);
  EXPECT_GE(r.norm, 0.5);
  EXPECT_NEAR(r.norm, norm2(r.perturbation), 1e-15);
  EXPECT_LT(forward(net, Vector{x[0] + r.perturbation[0], x[1] + r.perturbation[1]})[0], 0.0);
}

TEST(Pgd, BelowSdfCertificateNeverFlips) {
  const auto b = koch_snowflake(2);
  const SdfModel sdf(b, {});
  Rng rng(9);
  for (int t = 0; t < 40; ++t) {
    const Vector x{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
    const double r = binary_certificate(sdf, x).radius;
    if (r < 1e-3) continue;
    EXPECT_FALSE(pgd_l2(sdf, x, predict_binary(sdf.logits(Matrix::row_vector(x))(0, 0)), 0.999 * r).found);
  }
}

TEST(Pgd, SoundOnRandomNets) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const LipNet net = make_network({{2, 32, 32, 1}}, seed);
    const LabeledDataset d = random_points(100, 20 + seed, 1.0);
    const Matrix f = forward(net, d.points);
    std::vector<int> labels(d.size());
    Vector safe(d.size()), loose(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      labels[i] = predict_binary(f(i, 0));
      safe[i] = 0.999 * std::abs(f(i, 0));
      loose[i] = 3.0 * std::abs(f(i, 0));
    }
    for (const auto& r : pgd_l2_batch(NetModel(net), d.points, labels, safe)) EXPECT_FALSE(r.found);
    for (std::size_t i = 0; const auto& r : pgd_l2_batch(NetModel(net), d.points, labels, loose)) {
      if (r.found) EXPECT_GE(r.norm, std::abs(f(i, 0)) * (1 - 1e-9));
      ++i;
    }
  }
}

TEST(Pgd, DeterministicWithSeed) {
  const LipNet net = make_network({{2, 16, 1}}, 1);
  const Vector x{0.2, -0.1};
  const double f = forward(net, x)[0];
  const PgdSettings s{.steps = 50, .restarts = 3, .seed = 5};
  const auto a = pgd_l2(net, x, predict_binary(f), 2 * std::abs(f) + 0.1, s);
  const auto b = pgd_l2(net, x, predict_binary(f), 2 * std::abs(f) + 0.1, s);
  EXPECT_EQ(a.found, b.found);
  EXPECT_EQ(a.perturbation, b.perturbation);
}

TEST(RobustAccuracy, ZeroEpsIsCleanAccuracy) {
  const LipNet net = make_network({{2, 16, 1}}, 2);
  const LabeledDataset d = random_points(100, 3);
  const double clean = accuracy(NetModel(net), d);
  EXPECT_EQ(robust_accuracy(NetModel(net), d, 0.0, RobustMode::Certified), clean);
  EXPECT_EQ(robust_accuracy(NetModel(net), d, 0.0, RobustMode::Empirical), clean);
}

TEST(RobustAccuracy, CertifiedBelowEmpiricalAndMonotone) {
  const LipNet net = make_network({{2, 32, 32, 1}}, 4);
  LabeledDataset d = random_points(150, 5);
  const Matrix f = forward(net, d.points);
  for (std::size_t i = 0; i < d.size(); ++i) d.labels[i] = predict_binary(f(i, 0) - 0.05);  // mostly correct
  double prev = 1.0;
  for (double eps : {0.0, 0.01, 0.05, 0.1, 0.2}) {
    const double c = robust_accuracy(NetModel(net), d, eps, RobustMode::Certified);
    const double e = robust_accuracy(NetModel(net), d, eps, RobustMode::Empirical, {.steps = 50});
    EXPECT_LE(c, e);
    EXPECT_LE(c, prev);
    prev = c;
  }
}

TEST(RobustAccuracy, SdfGridFractionBeyondEps) {
  const auto b = koch_snowflake(1);
  const LabeledDataset grid = sdf_grid_dataset(b, {}, 30);
  std::size_t far = 0;
  for (double t : grid.targets) far += std::abs(t) >= 0.1;
  EXPECT_NEAR(robust_accuracy(SdfModel(b, {}), grid, 0.1, RobustMode::Certified), double(far) / double(grid.size()),
              1e-15);
}

TEST(BalanceBias, SymmetricAndConstant) {
  const Vector fp{1.0, 2.0, 0.5}, fq{-1.0, -2.0, -0.5};
  EXPECT_NEAR(balance_bias(fp, fq, 1e-12), 0.0, 1e-9);
  EXPECT_NEAR(balance_bias(Vector(4, 0.7), Vector(3, 0.7), 1e-12), 0.7, 1e-9);
}

TEST(BalanceBias, SolvesBalanceEquation) {
  const LipNet net = make_network({{2, 16, 16, 1}}, 6);
  const LabeledDataset d = random_points(120, 7);
  const Matrix p = d.class_points(1), q = d.class_points(-1);
  const double t = balance_bias(net, p, q, 1e-10);
  const Matrix fp = forward(net, p), fq = forward(net, q);
  double zp = 0.0, zq = 0.0;
  for (double f : fp.data()) zp += 1.0 / (1.0 + std::exp(f - t));
  for (double f : fq.data()) zq += 1.0 / (1.0 + std::exp(-(f - t)));
  EXPECT_LE(std::abs(zp / double(fp.size()) - zq / double(fq.size())), 1e-8);
}

TEST(BalanceBias, GapStrictlyIncreasing) {
  const Vector fp{0.3, -1.2, 2.5, 0.0}, fq{1.0, -0.4};
  double prev = -INFINITY;
  for (double t = -5.0; t <= 5.0; t += 0.05) {
    const double g = balance_gap(fp, fq, t);
    EXPECT_GT(g, prev);
    prev = g;
  }
}
