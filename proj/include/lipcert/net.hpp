#pragma once

// Feed-forward 1-Lipschitz networks: dense layers carrying a norm
// constraint, GroupSort2 (or ReLU for unconstrained baselines), forward
// and reverse-mode passes, and the projection that restores the
// constraint after each optimizer step.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "lipcert/error.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/rng.hpp"

namespace lipcert {

enum class Constraint { Orthogonal, SpectralNormOnly, Unconstrained };
enum class Mode { Constrained, Unconstrained };
enum class Activation { GroupSort2, Relu };

inline std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::Orthogonal: return "orthogonal";
    case Constraint::SpectralNormOnly: return "spectral";
    case Constraint::Unconstrained: return "unconstrained";
  }
  return "?";
}

inline std::string_view to_string(Mode m) { return m == Mode::Constrained ? "constrained" : "unconstrained"; }

struct DenseLayer {
  Matrix weights;  // fan_out x fan_in
  Vector bias;     // fan_out
  Constraint constraint = Constraint::Orthogonal;

  std::size_t fan_in() const { return weights.cols(); }
  std::size_t fan_out() const { return weights.rows(); }
};

struct GroupSort2Layer {};
struct ReluLayer {};

using Layer = std::variant<DenseLayer, GroupSort2Layer, ReluLayer>;

// ---------------------------------------------------------------------------
// Activations on batches (one sample per row)

/// Sorts each consecutive pair (x[2i], x[2i+1]) into (min, max).
inline Vector groupsort2(std::span<const double> x) {
  require(x.size() % 2 == 0, ErrorCode::OddWidth, "groupsort2 on odd width " + std::to_string(x.size()));
  Vector out(x.begin(), x.end());
  for (std::size_t i = 0; i + 1 < out.size(); i += 2)
    if (out[i] > out[i + 1]) std::swap(out[i], out[i + 1]);
  return out;
}

inline Matrix groupsort2(const Matrix& x) {
  require(x.cols() % 2 == 0, ErrorCode::OddWidth, "groupsort2 on odd width " + std::to_string(x.cols()));
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t i = 0; i + 1 < row.size(); i += 2)
      if (row[i] > row[i + 1]) std::swap(row[i], row[i + 1]);
  }
  return out;
}

inline Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

// ---------------------------------------------------------------------------

class LipNet {
 public:
  LipNet() = default;

  LipNet(Mode mode, std::vector<Layer> layers) : mode_(mode), layers_(std::move(layers)) { validate(); }

  Mode mode() const noexcept { return mode_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  std::size_t input_dim() const { return first_dense().fan_in(); }
  std::size_t output_dim() const { return last_dense().fan_out(); }

  /// Dense layers in forward order; parameter gradients use this indexing.
  std::vector<const DenseLayer*> dense_layers() const {
    std::vector<const DenseLayer*> out;
    for (const auto& l : layers_)
      if (const auto* d = std::get_if<DenseLayer>(&l)) out.push_back(d);
    return out;
  }
  std::vector<DenseLayer*> dense_layers() {
    std::vector<DenseLayer*> out;
    for (auto& l : layers_)
      if (auto* d = std::get_if<DenseLayer>(&l)) out.push_back(d);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto* d : dense_layers()) n += d->weights.size() + d->bias.size();
    return n;
  }

 private:
  const DenseLayer& first_dense() const {
    for (const auto& l : layers_)
      if (const auto* d = std::get_if<DenseLayer>(&l)) return *d;
    fail(ErrorCode::ShapeMismatch, "network has no dense layer");
  }
  const DenseLayer& last_dense() const {
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      if (const auto* d = std::get_if<DenseLayer>(&*it)) return *d;
    fail(ErrorCode::ShapeMismatch, "network has no dense layer");
  }

  void validate() const {
    require(!layers_.empty(), ErrorCode::ShapeMismatch, "empty network");
    std::size_t width = first_dense().fan_in();
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      if (const auto* d = std::get_if<DenseLayer>(&l)) {
        require(d->fan_in() == width, ErrorCode::ShapeMismatch,
                "layer " + std::to_string(i) + " expects width " + std::to_string(d->fan_in()) + ", got " +
                    std::to_string(width));
        require(d->bias.size() == d->fan_out(), ErrorCode::ShapeMismatch,
                "layer " + std::to_string(i) + " bias length mismatch");
        if (mode_ == Mode::Constrained)
          require(d->constraint != Constraint::Unconstrained, ErrorCode::UnconstrainedNet,
                  "constrained network holds an unconstrained dense layer");
        width = d->fan_out();
      } else if (std::holds_alternative<GroupSort2Layer>(l)) {
        require(width % 2 == 0, ErrorCode::OddWidth, "GroupSort2 after odd width " + std::to_string(width));
      }
    }
  }

  Mode mode_ = Mode::Constrained;
  std::vector<Layer> layers_;
};

// ---------------------------------------------------------------------------
// Forward / backward

struct ForwardTrace {
  std::vector<Matrix> inputs;  // input of each layer
  Matrix output;
};

inline ForwardTrace forward_trace(const LipNet& net, const Matrix& x) {
  require(x.cols() == net.input_dim(), ErrorCode::ShapeMismatch,
          "input width " + std::to_string(x.cols()) + " != " + std::to_string(net.input_dim()));
  ForwardTrace trace;
  trace.inputs.reserve(net.layers().size());
  Matrix a = x;
  for (const auto& layer : net.layers()) {
    trace.inputs.push_back(a);
    a = std::visit(
        [&](const auto& l) -> Matrix {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, DenseLayer>) {
            Matrix z = matmul_bt(a, l.weights);
            for (std::size_t r = 0; r < z.rows(); ++r) {
              auto row = z.row(r);
              for (std::size_t c = 0; c < row.size(); ++c) row[c] += l.bias[c];
            }
            return z;
          } else if constexpr (std::is_same_v<L, GroupSort2Layer>) {
            return groupsort2(a);
          } else {
            return relu(a);
          }
        },
        layer);
  }
  trace.output = std::move(a);
  return trace;
}

/// Logits for a batch (one sample per row).
inline Matrix forward(const LipNet& net, const Matrix& x) { return forward_trace(net, x).output; }

inline Vector forward(const LipNet& net, std::span<const double> x) {
  return forward(net, Matrix::row_vector(x)).values();
}

struct GradientBundle {
  std::vector<Matrix> d_weights;  // one per dense layer, forward order
  std::vector<Vector> d_bias;
  Matrix input_grad;  // one row per sample
};

/// Backpropagates `upstream` (d objective / d logits, one row per sample)
/// given a trace of the same batch. Parameter gradients are summed over
/// the batch. GroupSort ties keep the identity routing.
inline GradientBundle backward(const LipNet& net, const ForwardTrace& trace, const Matrix& upstream,
                               bool want_params = true) {
  require(upstream.rows() == trace.output.rows() && upstream.cols() == trace.output.cols(),
          ErrorCode::ShapeMismatch, "upstream gradient shape differs from network output");
  const auto& layers = net.layers();
  GradientBundle grads;
  const auto dense = net.dense_layers();
  if (want_params) {
    grads.d_weights.resize(dense.size());
    grads.d_bias.resize(dense.size());
  }
  std::size_t dense_idx = dense.size();
  Matrix g = upstream;
  for (std::size_t li = layers.size(); li-- > 0;) {
    const Matrix& in = trace.inputs[li];
    if (const auto* d = std::get_if<DenseLayer>(&layers[li])) {
      --dense_idx;
      if (want_params) {
        grads.d_weights[dense_idx] = matmul_at(g, in);
        Vector db(d->fan_out(), 0.0);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          const auto row = g.row(r);
          for (std::size_t c = 0; c < db.size(); ++c) db[c] += row[c];
        }
        grads.d_bias[dense_idx] = std::move(db);
      }
      g = matmul(g, d->weights);
    } else if (std::holds_alternative<GroupSort2Layer>(layers[li])) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto gr = g.row(r);
        const auto xr = in.row(r);
        for (std::size_t i = 0; i + 1 < gr.size(); i += 2)
          if (xr[i] > xr[i + 1]) std::swap(gr[i], gr[i + 1]);
      }
    } else {
      const auto vals = in.data();
      auto gv = g.data();
      for (std::size_t i = 0; i < gv.size(); ++i)
        if (!(vals[i] > 0.0)) gv[i] = 0.0;
    }
  }
  grads.input_grad = std::move(g);
  return grads;
}

inline GradientBundle backward(const LipNet& net, const Matrix& x, const Matrix& upstream) {
  return backward(net, forward_trace(net, x), upstream);
}

/// ∇ₓ of ⟨upstream, f(x)⟩ per row; skips parameter gradients.
inline Matrix input_gradient(const LipNet& net, const Matrix& x, const Matrix& upstream) {
  return backward(net, forward_trace(net, x), upstream, false).input_grad;
}

inline double input_gradient_norm(const LipNet& net, std::span<const double> x) {
  require(net.output_dim() == 1, ErrorCode::ShapeMismatch, "input_gradient_norm needs a scalar-output net");
  const Matrix g = input_gradient(net, Matrix::row_vector(x), Matrix(1, 1, 1.0));
  return norm2(g.data());
}

// ---------------------------------------------------------------------------
// Constraint maintenance

struct ProjectionSettings {
  std::size_t power_iters = 50;  // pre-scaling estimate before Björck
  double power_tol = 1e-9;
  std::size_t bjorck_iters = 100;
  double bjorck_tol = 1e-7;
};

inline void project_layer(DenseLayer& layer, const ProjectionSettings& s = {}) {
  if (layer.constraint == Constraint::Unconstrained) return;
  const auto vals = layer.weights.data();
  if (std::all_of(vals.begin(), vals.end(), [](double x) { return x == 0.0; })) return;
  if (layer.constraint == Constraint::SpectralNormOnly) {
    layer.weights /= spectral_norm(layer.weights);
    return;
  }
  if (orthogonality_residual(layer.weights) < s.bjorck_tol * 1e-6) return;
  const double sigma = power_iteration(layer.weights, std::max<std::size_t>(s.power_iters, 10), s.power_tol).sigma;
  layer.weights = bjorck_orthogonalize(layer.weights / sigma, s.bjorck_iters, s.bjorck_tol).matrix;
}

/// Restores every layer's constraint. Unconstrained layers are untouched.
inline void project(LipNet& net, const ProjectionSettings& s = {}) {
  for (auto* d : net.dense_layers()) project_layer(*d, s);
}

/// Product of per-layer spectral norms; activations contribute a factor 1.
inline double lipschitz_upper_bound(const LipNet& net) {
  double bound = 1.0;
  for (const auto* d : net.dense_layers()) bound *= spectral_norm(d->weights);
  return bound;
}

inline double max_spectral_norm(const LipNet& net) {
  double m = 0.0;
  for (const auto* d : net.dense_layers()) m = std::max(m, spectral_norm(d->weights));
  return m;
}

// ---------------------------------------------------------------------------
// Construction

struct NetSpec {
  std::vector<std::size_t> widths;  // input, hidden..., output
  Mode mode = Mode::Constrained;
  Activation activation = Activation::GroupSort2;
};

/// i.i.d. N(0, 1/fan_in) weights, zero biases, then one projection.
/// Constrained nets use orthogonal hidden layers and a spectrally
/// normalized output layer.
inline LipNet make_network(const NetSpec& spec, std::uint64_t seed) {
  require(spec.widths.size() >= 2, ErrorCode::ShapeMismatch, "need at least input and output widths");
  Rng rng(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
    const std::size_t fan_in = spec.widths[i];
    const std::size_t fan_out = spec.widths[i + 1];
    require(fan_in > 0 && fan_out > 0, ErrorCode::ShapeMismatch, "zero layer width");
    const bool last = i + 2 == spec.widths.size();
    DenseLayer d;
    d.weights = Matrix(fan_out, fan_in);
    const double scale = 1.0 / std::sqrt(double(fan_in));
    for (double& w : d.weights.data()) w = rng.normal() * scale;
    d.bias.assign(fan_out, 0.0);
    if (spec.mode == Mode::Unconstrained)
      d.constraint = Constraint::Unconstrained;
    else
      d.constraint = last ? Constraint::SpectralNormOnly : Constraint::Orthogonal;
    layers.emplace_back(std::move(d));
    if (!last) {
      if (spec.activation == Activation::GroupSort2)
        layers.emplace_back(GroupSort2Layer{});
      else
        layers.emplace_back(ReluLayer{});
    }
  }
  LipNet net(spec.mode, std::move(layers));
  project(net);
  return net;
}

}  // namespace lipcert
