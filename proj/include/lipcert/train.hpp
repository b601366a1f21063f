#pragma once

// Mini-batch training with a projection after every parameter update.

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "lipcert/data.hpp"
#include "lipcert/error.hpp"
#include "lipcert/losses.hpp"
#include "lipcert/net.hpp"
#include "lipcert/optim.hpp"
#include "lipcert/robustness.hpp"

namespace lipcert {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double eval_loss = std::numeric_limits<double>::quiet_NaN();
  double eval_accuracy = std::numeric_limits<double>::quiet_NaN();
  double mcr = std::numeric_limits<double>::quiet_NaN();
  double max_spectral_norm = 0.0;
  double lipschitz_upper_bound = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

struct BatchLoss {
  double value = 0.0;       // mean over rows
  Matrix upstream;          // d mean-loss / d logits
  std::size_t correct = 0;  // rows predicted correctly
};

/// Mean loss of a batch of logits and its gradient. `rows` selects the
/// dataset entries the logits belong to.
inline BatchLoss batch_loss(const LossSpec& spec, const Matrix& logits, const LabeledDataset& data,
                            std::span<const std::size_t> rows) {
  const std::size_t n = logits.rows(), k = logits.cols();
  require(rows.size() == n, ErrorCode::ShapeMismatch, "batch rows do not match logits");
  BatchLoss out;
  out.upstream = Matrix(n, k);
  const double inv = 1.0 / double(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = rows[r];
    const int y = data.labels[i];
    const auto row = logits.row(r);
    out.correct += predict(row) == y;
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, CceTau> || std::is_same_v<S, MulticlassHkr>) {
            MultiLossValue lv;
            if constexpr (std::is_same_v<S, CceTau>) lv = cce_tau(row, std::size_t(y), s.tau);
            else lv = multiclass_hkr(row, std::size_t(y), s.alpha, s.m);
            out.value += lv.value * inv;
            for (std::size_t c = 0; c < k; ++c) out.upstream(r, c) = lv.dlogits[c] * inv;
          } else {
            LossValue lv;
            if constexpr (std::is_same_v<S, BceTau>) lv = bce_tau(row[0], y, s.tau);
            else if constexpr (std::is_same_v<S, HingeM>) lv = hinge_m(row[0], y, s.m);
            else if constexpr (std::is_same_v<S, Wass>) lv = wass_loss(row[0], y);
            else if constexpr (std::is_same_v<S, Hkr>) lv = hkr(row[0], y, s.alpha, s.m);
            else {
              const double e = row[0] - data.targets[i];
              lv = {e * e, 2.0 * e};
            }
            out.value += lv.value * inv;
            out.upstream(r, 0) = lv.dlogit * inv;
          }
        },
        spec);
  }
  return out;
}

/// Throws ShapeMismatch when the loss, labels and network output disagree.
inline void check_compatible(const LipNet& net, const LabeledDataset& data, const LossSpec& loss) {
  data.validate();
  validate(loss);
  require(data.dim() == net.input_dim(), ErrorCode::ShapeMismatch,
          "data dimension " + std::to_string(data.dim()) + " != network input " + std::to_string(net.input_dim()));
  if (is_multiclass(loss)) {
    require(data.kind == LabelKind::Multiclass, ErrorCode::ShapeMismatch, describe(loss) + " needs class labels");
    require(net.output_dim() == data.num_classes, ErrorCode::ShapeMismatch,
            "network has " + std::to_string(net.output_dim()) + " outputs for " +
                std::to_string(data.num_classes) + " classes");
  } else {
    require(net.output_dim() == 1, ErrorCode::ShapeMismatch, describe(loss) + " needs a scalar-output network");
    require(data.kind == LabelKind::Binary, ErrorCode::ShapeMismatch, describe(loss) + " needs ±1 labels");
    if (is_regression(loss))
      require(data.has_targets(), ErrorCode::ShapeMismatch, "mse needs regression targets");
  }
}

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  double mcr = 0.0;  // mcr or mmcr by label kind
};

inline Evaluation evaluate(const LipNet& net, const LabeledDataset& data, const LossSpec& loss) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const Matrix logits = forward(net, data.points);
  const BatchLoss bl = batch_loss(loss, logits, data, rows);
  Evaluation e;
  e.loss = bl.value;
  e.accuracy = double(bl.correct) / double(data.size());
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += signed_margin(logits.row(i), data.labels[i]);
  e.mcr = s / double(data.size());
  return e;
}

struct TrainOptions {
  /// Called after each epoch; return false to stop early.
  std::function<bool(const EpochRecord&, const LipNet&)> on_epoch;
  /// Spectral norms per epoch cost a few power iterations per layer.
  bool record_spectral = true;
  ProjectionSettings projection;
};

/// Seeded mini-batch optimization. Constrained nets are projected after
/// every parameter update, so the constraint holds at every checkpoint.
inline TrainHistory train(LipNet& net, const LabeledDataset& data, const LossSpec& loss, const OptimizerCfg& opt,
                          const LabeledDataset* eval = nullptr, const TrainOptions& options = {}) {
  check_compatible(net, data, loss);
  if (eval) check_compatible(net, *eval, loss);
  opt.validate();

  TrainHistory history;
  Optimizer optimizer(opt, net);
  Rng rng(opt.seed);
  const std::size_t n = data.size();
  const std::size_t batch = std::min(opt.batch_size, n);

  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    const auto order = rng.permutation(n);
    const double lr = opt.lr_at(epoch - 1);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      Matrix x(rows.size(), data.dim());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = data.points.row(rows[r]);
        std::copy(src.begin(), src.end(), x.row(r).begin());
      }
      const ForwardTrace trace = forward_trace(net, x);
      const BatchLoss bl = batch_loss(loss, trace.output, data, rows);
      if (!std::isfinite(bl.value))
        throw NonFiniteLossError(epoch, "non-finite loss in epoch " + std::to_string(epoch));
      loss_sum += bl.value * double(rows.size());
      correct += bl.correct;
      const GradientBundle grads = backward(net, trace, bl.upstream);
      optimizer.step(net, grads, lr);
      if (net.mode() == Mode::Constrained) project(net, options.projection);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / double(n);
    rec.train_accuracy = double(correct) / double(n);
    const LabeledDataset& metric_set = eval ? *eval : data;
    const Evaluation ev = evaluate(net, metric_set, loss);
    if (eval) {
      rec.eval_loss = ev.loss;
      rec.eval_accuracy = ev.accuracy;
    }
    rec.mcr = ev.mcr;
    if (options.record_spectral) {
      rec.max_spectral_norm = max_spectral_norm(net);
      rec.lipschitz_upper_bound = lipschitz_upper_bound(net);
    }
    history.push_back(rec);
    if (options.on_epoch && !options.on_epoch(rec, net)) break;
  }
  return history;
}

}  // namespace lipcert
