#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lipcert/error.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/net.hpp"

namespace lipcert {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerCfg {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double momentum = 0.0;  // SGD only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-7;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  bool cosine = false;  // multiply lr by a half-cosine decay over the run

  void validate() const {
    require(lr > 0.0 && std::isfinite(lr), ErrorCode::InvalidArgument, "learning rate must be > 0");
    require(batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be >= 1");
    require(momentum >= 0.0 && momentum < 1.0, ErrorCode::InvalidArgument, "momentum must lie in [0, 1)");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::InvalidArgument,
            "Adam betas must lie in [0, 1)");
    require(eps_hat > 0.0, ErrorCode::InvalidArgument, "eps_hat must be > 0");
  }

  double lr_at(std::size_t epoch) const {
    if (!cosine || epochs <= 1) return lr;
    return lr * 0.5 * (1.0 + std::cos(std::numbers::pi * double(epoch) / double(epochs)));
  }
};

/// SGD with momentum or Adam over the dense-layer parameters of one net.
class Optimizer {
 public:
  Optimizer(const OptimizerCfg& cfg, const LipNet& net) : cfg_(cfg) {
    cfg_.validate();
    for (const auto* d : net.dense_layers()) {
      m_w_.emplace_back(d->weights.rows(), d->weights.cols());
      v_w_.emplace_back(d->weights.rows(), d->weights.cols());
      m_b_.emplace_back(d->bias.size(), 0.0);
      v_b_.emplace_back(d->bias.size(), 0.0);
    }
  }

  /// Applies one update with the given gradients (already averaged).
  void step(LipNet& net, const GradientBundle& g, double lr) {
    ++t_;
    auto dense = net.dense_layers();
    require(dense.size() == g.d_weights.size(), ErrorCode::ShapeMismatch, "gradient bundle does not match network");
    for (std::size_t l = 0; l < dense.size(); ++l) {
      update(dense[l]->weights.data(), g.d_weights[l].data(), m_w_[l].data(), v_w_[l].data(), lr);
      update(dense[l]->bias, g.d_bias[l], m_b_[l], v_b_[l], lr);
    }
  }

  std::size_t steps_taken() const { return t_; }

 private:
  void update(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v, double lr) {
    if (cfg_.kind == OptimizerKind::Sgd) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.momentum * m[i] + g[i];
        p[i] -= lr * m[i];
      }
      return;
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps_hat);
    }
  }

  OptimizerCfg cfg_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
};

}  // namespace lipcert
