#pragma once

// Desk-scale experiment drivers shared by the CLI and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/data.hpp"
#include "lipcert/error.hpp"
#include "lipcert/geometry.hpp"
#include "lipcert/losses.hpp"
#include "lipcert/net.hpp"
#include "lipcert/optim.hpp"
#include "lipcert/robustness.hpp"
#include "lipcert/train.hpp"
#include "lipcert/transport.hpp"

namespace lipcert {

inline double median(std::vector<double> v) {
  require(!v.empty(), ErrorCode::InvalidArgument, "median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Hidden widths wrapped with the input and output sizes.
inline std::vector<std::size_t> with_io(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(out);
  return w;
}

/// Epoch count that gives roughly `steps` optimizer updates.
inline std::size_t epochs_for_steps(std::size_t steps, std::size_t n, std::size_t batch) {
  const std::size_t per_epoch = (n + batch - 1) / std::max<std::size_t>(batch, 1);
  return std::max<std::size_t>(1, (steps + per_epoch - 1) / per_epoch);
}

// ---------------------------------------------------------------------------
// Kantorovich-Rubinstein dual fit

struct DualFitSettings {
  // transport potentials between point clouds need depth more than width
  std::vector<std::size_t> hidden = std::vector<std::size_t>(10, 32);
  double lr = 0.01;
  std::size_t max_epochs = 8000;
  bool cosine = true;
  std::uint64_t seed = 0;
  /// Stop once the dual estimate reaches this value.
  double target = std::numeric_limits<double>::infinity();
};

struct DualFitResult {
  LipNet net;
  double dual = 0.0;
  std::size_t epochs = 0;
  TrainHistory history;
};

/// Trains a Constrained potential with the Wasserstein loss, full batch,
/// on P (+1) against Q (−1). Inputs are centered on the mean atom during
/// training and the shift is folded back into the first bias, so the
/// returned net acts on raw coordinates.
inline DualFitResult kr_dual_fit(const DiscreteDist& p, const DiscreteDist& q, const DualFitSettings& s = {}) {
  p.validate();
  q.validate();
  require(p.dim() == q.dim(), ErrorCode::InvalidDistribution, "atom dimensions differ");
  require(p.size() == q.size(), ErrorCode::UnsupportedWeights, "dual fit needs equal atom counts");
  for (const auto* d : {&p, &q})
    for (double w : d->weights)
      require(std::abs(w - 1.0 / double(d->size())) <= 1e-12, ErrorCode::UnsupportedWeights,
              "dual fit needs uniform weights");
  const std::size_t n = p.size(), dim = p.dim();

  Vector center(dim, 0.0);
  for (const auto* d : {&p, &q})
    for (const auto& a : d->atoms)
      for (std::size_t j = 0; j < dim; ++j) center[j] += a[j] / double(2 * n);

  LabeledDataset data;
  data.points = Matrix(2 * n, dim);
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const Vector& a = i < n ? p.atoms[i] : q.atoms[i - n];
    for (std::size_t j = 0; j < dim; ++j) data.points(i, j) = a[j] - center[j];
    data.labels.push_back(i < n ? 1 : -1);
  }

  LipNet net = make_network({with_io(dim, s.hidden, 1)}, s.seed);
  OptimizerCfg opt;
  opt.lr = s.lr;
  opt.epochs = s.max_epochs;
  opt.batch_size = 2 * n;
  opt.cosine = s.cosine;
  opt.seed = s.seed;

  // keep the best potential: the mean Wasserstein loss of the balanced
  // full batch is −dual/2, evaluated after each update
  std::optional<LipNet> best;
  double best_dual = -std::numeric_limits<double>::infinity();
  TrainOptions options;
  options.record_spectral = false;
  options.on_epoch = [&](const EpochRecord&, const LipNet& current) {
    const double d = -2.0 * evaluate(current, data, Wass{}).loss;
    if (d > best_dual) best_dual = d, best = current;
    return best_dual < s.target;
  };
  TrainHistory history = train(net, data, Wass{}, opt, nullptr, options);
  if (best) net = std::move(*best);

  DenseLayer& first = *net.dense_layers().front();
  const Vector shift = matvec(first.weights, center);
  for (std::size_t i = 0; i < first.bias.size(); ++i) first.bias[i] -= shift[i];

  const double dual = kr_dual_estimate(net, p, q);
  const std::size_t epochs = history.size();
  return {std::move(net), dual, epochs, std::move(history)};
}

/// Two uniform clouds of `atoms` points in the plane: P around the origin,
/// Q around a seeded offset, both with seeded anisotropic spread.
inline std::pair<DiscreteDist, DiscreteDist> random_dist_pair(std::size_t atoms, std::uint64_t seed) {
  require(atoms >= 1, ErrorCode::InvalidArgument, "random_dist_pair needs atoms >= 1");
  Rng rng(seed);
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  const double shift = rng.uniform(0.5, 2.0);
  const double sx = rng.uniform(0.3, 1.0), sy = rng.uniform(0.3, 1.0);
  std::vector<Vector> a, b;
  for (std::size_t i = 0; i < atoms; ++i) a.push_back({sx * rng.normal(), sy * rng.normal()});
  for (std::size_t i = 0; i < atoms; ++i)
    b.push_back({shift * std::cos(angle) + sy * rng.normal(), shift * std::sin(angle) + sx * rng.normal()});
  return {DiscreteDist::uniform(std::move(a)), DiscreteDist::uniform(std::move(b))};
}

struct WeakClassifierResult {
  double w1 = 0.0;
  double dual = 0.0;
  ThresholdResult threshold;
  double lipschitz_bound = 0.0;
  std::size_t epochs = 0;
};

/// Dirac comb: a near-optimal transport potential is a poor classifier.
inline WeakClassifierResult weak_classifier_experiment(std::size_t n = 20, std::uint64_t seed = 1,
                                                       double target_fraction = 0.99) {
  const auto [p, q] = pathological_diracs(n);
  WeakClassifierResult r;
  r.w1 = w1_exact_1d(p, q);
  DualFitSettings s;
  s.hidden = {32, 32};
  s.lr = 0.01;
  s.max_epochs = 3000;
  s.cosine = false;
  s.seed = seed;
  s.target = target_fraction * r.w1;
  const DualFitResult fit = kr_dual_fit(p, q, s);
  r.dual = fit.dual;
  r.epochs = fit.epochs;
  r.lipschitz_bound = lipschitz_upper_bound(fit.net);
  const Matrix fp = forward(fit.net, p.as_matrix()), fq = forward(fit.net, q.as_matrix());
  r.threshold = best_threshold_accuracy(fp.data(), fq.data());
  return r;
}

// ---------------------------------------------------------------------------
// Divergence of unconstrained BCE training

struct DivergenceSettings {
  std::size_t linear_steps = 30000;
  double linear_lr = 1.0;
  std::vector<std::size_t> hidden{64, 64, 64};
  double net_lr = 0.01;
  std::size_t points = 200;
  std::uint64_t seed = 0;
};

struct DivergenceResult {
  TrainHistory linear;           // Example linear model f(x) = W·x + b
  std::vector<double> linear_w;  // |W| after each full-batch step
  TrainHistory unconstrained;    // ReLU net, max_spectral_norm per epoch
  TrainHistory constrained;      // control run, lipschitz_upper_bound per epoch
};

/// Full-batch gradient descent with BCE (τ = 1) on the two-point task for
/// a scalar linear model, starting from W = b = 0.
inline TrainHistory linear_bce_run(std::size_t steps, double lr, std::vector<double>* weights = nullptr) {
  const LabeledDataset data = linear_pair_task();
  DenseLayer layer{Matrix(1, 1), Vector{0.0}, Constraint::Unconstrained};
  LipNet net(Mode::Unconstrained, {Layer{layer}});
  OptimizerCfg opt;
  opt.kind = OptimizerKind::Sgd;
  opt.lr = lr;
  opt.epochs = steps;
  opt.batch_size = data.size();
  TrainOptions options;
  options.on_epoch = [&](const EpochRecord&, const LipNet& n) {
    if (weights) weights->push_back(std::abs(n.dense_layers().front()->weights(0, 0)));
    return true;
  };
  return train(net, data, BceTau{1.0}, opt, nullptr, options);
}

/// `epochs` applies to the two network runs on noise-free two-moons, which
/// is linearly inseparable but separable by a curve.
inline DivergenceResult divergence_experiment(std::size_t epochs, const DivergenceSettings& s = {}) {
  DivergenceResult r;
  r.linear = linear_bce_run(s.linear_steps, s.linear_lr, &r.linear_w);

  const LabeledDataset data = two_moons(s.points, 0.0, s.seed);
  OptimizerCfg opt;
  opt.lr = s.net_lr;
  opt.epochs = epochs;
  opt.batch_size = data.size();
  opt.seed = s.seed;
  LipNet free = make_network({with_io(2, s.hidden, 1), Mode::Unconstrained, Activation::Relu}, s.seed);
  r.unconstrained = train(free, data, BceTau{1.0}, opt);
  LipNet control = make_network({with_io(2, s.hidden, 1)}, s.seed);
  r.constrained = train(control, data, BceTau{1.0}, opt);
  return r;
}

// ---------------------------------------------------------------------------
// Train/test gap against dataset size

struct ConsistencySettings {
  std::vector<std::size_t> hidden{64, 64, 64};
  double lr = 0.003;
  std::size_t batch_size = 64;
  std::size_t steps = 2000;  // optimizer updates per run, whatever the fraction
  bool unconstrained_baseline = true;
};

struct ConsistencyRow {
  double fraction = 0.0;
  std::size_t n = 0;
  double tau = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Constrained;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double loss_gap() const { return test_loss - train_loss; }
  double accuracy_gap() const { return train_accuracy - test_accuracy; }
};

/// One run per (fraction, τ, seed) on a seeded prefix slice of `base`,
/// evaluated on `test`. With the baseline on, an Unconstrained ReLU net is
/// trained on each slice with the same loss.
inline std::vector<ConsistencyRow> consistency_experiment(const std::vector<double>& fractions,
                                                          const std::vector<double>& tau_list,
                                                          const LabeledDataset& base, const LabeledDataset& test,
                                                          const std::vector<std::uint64_t>& seeds,
                                                          const ConsistencySettings& s = {}) {
  for (double f : fractions)
    require(f > 0.0 && f <= 1.0, ErrorCode::InvalidArgument, "fractions must lie in (0, 1]");
  require(!tau_list.empty() && !seeds.empty(), ErrorCode::InvalidArgument, "consistency needs taus and seeds");
  std::vector<ConsistencyRow> rows;
  for (double fraction : fractions)
    for (double tau : tau_list)
      for (std::uint64_t seed : seeds) {
        const LabeledDataset train_set = fraction_slice(base, fraction, seed);
        const LossSpec loss = BceTau{tau};
        OptimizerCfg opt;
        opt.lr = s.lr;
        opt.batch_size = s.batch_size;
        opt.seed = seed;
        opt.epochs = epochs_for_steps(s.steps, train_set.size(), s.batch_size);
        TrainOptions options;
        options.record_spectral = false;
        std::vector<Mode> modes{Mode::Constrained};
        if (s.unconstrained_baseline) modes.push_back(Mode::Unconstrained);
        for (Mode mode : modes) {
          const Activation act = mode == Mode::Constrained ? Activation::GroupSort2 : Activation::Relu;
          LipNet net = make_network({with_io(base.dim(), s.hidden, 1), mode, act}, 100 + seed);
          train(net, train_set, loss, opt, nullptr, options);
          const Evaluation tr = evaluate(net, train_set, loss), te = evaluate(net, test, loss);
          rows.push_back({fraction, train_set.size(), tau, seed, mode, tr.loss, te.loss, tr.accuracy, te.accuracy});
        }
      }
  return rows;
}

/// Median loss gap over the rows matching a fraction, τ and mode.
inline double median_gap(const std::vector<ConsistencyRow>& rows, double fraction, double tau, Mode mode) {
  std::vector<double> g;
  for (const auto& r : rows)
    if (r.fraction == fraction && r.tau == tau && r.mode == mode) g.push_back(r.loss_gap());
  return median(g);
}

// ---------------------------------------------------------------------------
// Accuracy/robustness sweep

struct SweepSettings {
  std::vector<std::size_t> hidden{64, 64, 64};
  OptimizerCfg opt{.lr = 0.003, .epochs = 60, .batch_size = 128};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<double> eps_list{0.1, 0.2};
};

struct SweepRow {
  LossSpec loss;
  // medians over seeds
  double clean_accuracy = 0.0;
  std::vector<double> robust_accuracy;  // certified, one per eps
  double mcr = 0.0;                     // MCR, or MMCR for multiclass losses
  double average_certificate = 0.0;
  std::vector<double> seed_accuracy, seed_mcr;
};

/// Train/test pair for one seed; binary labels expected.
using TaskFactory = std::function<std::pair<LabeledDataset, LabeledDataset>(std::uint64_t seed)>;

inline TaskFactory two_moons_task(std::size_t n_train = 1000, std::size_t n_test = 2000, double noise = 0.15) {
  return [=](std::uint64_t seed) {
    return std::pair{two_moons(n_train, noise, 10 + seed), two_moons(n_test, noise, 1000 + seed)};
  };
}

/// One row per loss in `grid`. Multiclass losses train a two-output net on
/// the same task with classes {+1 → 0, −1 → 1}.
inline std::vector<SweepRow> pareto_sweep(const TaskFactory& task, const std::vector<LossSpec>& grid,
                                          const SweepSettings& s = {}) {
  require(!grid.empty(), ErrorCode::InvalidArgument, "pareto_sweep needs a nonempty grid");
  require(!s.seeds.empty(), ErrorCode::InvalidArgument, "pareto_sweep needs at least one seed");
  for (const auto& l : grid) validate(l);
  std::vector<SweepRow> rows;
  for (const auto& loss : grid) {
    SweepRow row;
    row.loss = loss;
    std::vector<std::vector<double>> robust(s.eps_list.size());
    std::vector<double> certs;
    for (std::uint64_t seed : s.seeds) {
      auto [train_set, test_set] = task(seed);
      std::size_t out = 1;
      if (is_multiclass(loss)) {
        train_set = to_two_class(train_set);
        test_set = to_two_class(test_set);
        out = 2;
      }
      LipNet net = make_network({with_io(train_set.dim(), s.hidden, out)}, 100 + seed);
      OptimizerCfg opt = s.opt;
      opt.seed = seed;
      TrainOptions options;
      options.record_spectral = false;
      train(net, train_set, loss, opt, nullptr, options);
      const NetModel model(net);
      row.seed_accuracy.push_back(accuracy(model, test_set));
      row.seed_mcr.push_back(mean_certifiable_robustness(model, test_set));
      for (std::size_t e = 0; e < s.eps_list.size(); ++e)
        robust[e].push_back(robust_accuracy(model, test_set, s.eps_list[e], RobustMode::Certified));
      certs.push_back(average_certificate(model, test_set));
    }
    row.clean_accuracy = median(row.seed_accuracy);
    row.mcr = median(row.seed_mcr);
    for (auto& r : robust) row.robust_accuracy.push_back(median(r));
    row.average_certificate = median(certs);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// SDF regression

struct SdfFitSettings {
  std::size_t iterations = 4;  // snowflake refinement
  std::vector<std::size_t> hidden{64, 64, 64, 64};
  double lr = 0.002;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 40;
  std::uint64_t seed = 0;
};

struct SdfFitResult {
  LipNet net;
  double final_mae = 0.0;  // best grid MAE seen
  std::size_t epochs = 0;
  bool budget_exhausted = false;
  TrainHistory history;
};

inline double grid_mae(const LipNet& net, const LabeledDataset& grid) {
  const Matrix f = forward(net, grid.points);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += std::abs(f(i, 0) - grid.targets[i]);
  return s / double(grid.size());
}

/// Regresses a Constrained net on the snowflake SDF grid with MSE until the
/// grid MAE drops below `stop_mae`. If the budget runs out first the best
/// net is returned with `budget_exhausted` set.
inline SdfFitResult sdf_fit_experiment(std::size_t resolution, double stop_mae, const SdfFitSettings& s = {}) {
  require(stop_mae > 0.0, ErrorCode::InvalidArgument, "stop_mae must be > 0");
  const LabeledDataset grid = sdf_grid_dataset(koch_snowflake(s.iterations), {}, resolution);
  LipNet net = make_network({with_io(2, s.hidden, 1)}, 7 + s.seed);
  OptimizerCfg opt;
  opt.lr = s.lr;
  opt.batch_size = s.batch_size;
  opt.epochs = s.max_epochs;
  opt.seed = s.seed;

  std::optional<LipNet> best;
  double best_mae = std::numeric_limits<double>::infinity();
  bool reached = false;
  TrainOptions options;
  options.on_epoch = [&](const EpochRecord&, const LipNet& current) {
    const double mae = grid_mae(current, grid);
    if (mae < best_mae) {
      best_mae = mae;
      best = current;
    }
    reached = mae < stop_mae || std::isinf(stop_mae);
    return !reached;
  };
  TrainHistory history = train(net, grid, Mse{}, opt, nullptr, options);
  const std::size_t epochs = history.size();
  if (!best) return {std::move(net), grid_mae(net, grid), epochs, !reached, std::move(history)};
  return {std::move(*best), best_mae, epochs, !reached, std::move(history)};
}

/// Pixel-equivalent MAE threshold: one grid step of the bounding box side.
inline double pixel_mae(std::size_t resolution, const BoundingBox& box = {}) {
  return (box.x_max - box.x_min) / double(resolution);
}

// ---------------------------------------------------------------------------
// Temperature and fitting of the light mixture modes

struct TauFitSettings {
  std::vector<std::size_t> hidden{64, 64, 64};
  double lr = 0.003;
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  std::size_t n = 2000;
};

struct TauFitResult {
  double tau = 0.0;
  double f_minority_pos = 0.0;  // logit at the light +1 mode center
  double f_minority_neg = 0.0;  // logit at the light −1 mode center
  double train_accuracy = 0.0;
  bool minority_fitted() const { return f_minority_pos > 0.0 && f_minority_neg < 0.0; }
  bool minority_overruled() const { return f_minority_pos < 0.0 && f_minority_neg > 0.0; }
};

inline TauFitResult tau_fitting_experiment(double tau, std::uint64_t seed, const TauFitSettings& s = {}) {
  const GaussianMixtureLayout layout;
  const LabeledDataset data = gaussian_mixture_task(seed, s.n, layout);
  LipNet net = make_network({with_io(2, s.hidden, 1)}, 100 + seed);
  OptimizerCfg opt;
  opt.lr = s.lr;
  opt.epochs = s.epochs;
  opt.batch_size = s.batch_size;
  opt.seed = seed;
  TrainOptions options;
  options.record_spectral = false;
  const TrainHistory h = train(net, data, BceTau{tau}, opt, nullptr, options);
  const auto cp = layout.minority_center(1), cn = layout.minority_center(-1);
  const Matrix f = forward(net, Matrix{{cp[0], cp[1]}, {cn[0], cn[1]}});
  return {tau, f(0, 0), f(1, 0), h.empty() ? 0.0 : h.back().train_accuracy};
}

// ---------------------------------------------------------------------------
// Random labels

struct RandomLabelSettings {
  std::vector<std::size_t> hidden = std::vector<std::size_t>(8, 64);
  double lr = 0.005;
  std::size_t epochs = 10000;
  double stop_accuracy = 2.0;  // also stop once train accuracy reaches this
  std::uint64_t seed = 0;
};

struct RandomLabelResult {
  std::size_t n = 0;
  double min_sep = 0.0;
  double margin = 0.0;
  double train_accuracy = 0.0;
  double certified_fraction = 0.0;  // share of points with certificate ≥ margin
};

/// Fits i.i.d. random labels on well-separated points with the hinge loss.
/// Throws Unsatisfiable when the point set cannot be drawn.
inline RandomLabelResult random_label_experiment(std::size_t n, double min_sep, double margin,
                                                 const RandomLabelSettings& s = {}) {
  const LabeledDataset data = random_label_task(n, min_sep, s.seed);
  LipNet net = make_network({with_io(2, s.hidden, 1)}, 100 + s.seed);
  OptimizerCfg opt;
  opt.lr = s.lr;
  opt.epochs = s.epochs;
  opt.batch_size = data.size();
  opt.seed = s.seed;
  TrainOptions options;
  options.record_spectral = false;
  options.on_epoch = [&](const EpochRecord& r, const LipNet&) {
    return r.train_loss > 0.0 && r.train_accuracy < s.stop_accuracy;
  };
  train(net, data, HingeM{margin}, opt, nullptr, options);

  const Matrix f = forward(net, data.points);
  std::size_t hits = 0, certified = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool ok = predict_binary(f(i, 0)) == data.labels[i];
    hits += ok;
    certified += ok && std::abs(f(i, 0)) >= margin;
  }
  return {n, min_sep, margin, double(hits) / double(n), double(certified) / double(n)};
}

}  // namespace lipcert
