#pragma once

// Experiment configuration files:
//
//   {
//     "task":      {"name": "two_moons", "n_train": 1000, "n_test": 2000, "noise": 0.15},
//     "net":       {"widths": [2, 64, 64, 64, 1], "mode": "constrained", "activation": "groupsort2"},
//     "loss":      {"kind": "hkr", "alpha": 10, "m": 0.1},
//     "optimizer": {"kind": "adam", "lr": 0.003, "epochs": 60, "batch_size": 128},
//     "seeds":     [0, 1, 2],
//     "eps_list":  [0.1, 0.2]
//   }
//
// Sweeps add "grid" (loss objects; array-valued tau/alpha/m expand), and the
// consistency command reads "fractions" and "tau_list".

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/data.hpp"
#include "lipcert/error.hpp"
#include "lipcert/geometry.hpp"
#include "lipcert/io.hpp"
#include "lipcert/losses.hpp"
#include "lipcert/net.hpp"
#include "lipcert/optim.hpp"

namespace lipcert {

struct TaskConfig {
  std::string name = "two_moons";  // two_moons, gaussian_mixture, linear_pair, snowflake_sdf, random_labels
  std::size_t n_train = 1000;
  std::size_t n_test = 2000;
  double noise = 0.15;          // two_moons
  std::size_t resolution = 100; // snowflake_sdf
  std::size_t iterations = 4;   // snowflake_sdf
  double min_sep = 0.05;        // random_labels
};

struct ExperimentConfig {
  TaskConfig task;
  NetSpec net{{2, 64, 64, 64, 1}};
  std::optional<LossSpec> loss;
  std::vector<LossSpec> grid;
  OptimizerCfg optimizer;
  std::vector<std::uint64_t> seeds;
  std::vector<double> eps_list;
  std::vector<double> fractions;
  std::vector<double> tau_list;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"two_moons", "gaussian_mixture", "linear_pair", "snowflake_sdf",
                                              "random_labels"};
  return names;
}

/// Train and test sets for one seed.
inline std::pair<LabeledDataset, LabeledDataset> make_task(const TaskConfig& t, std::uint64_t seed) {
  if (t.name == "two_moons") return {two_moons(t.n_train, t.noise, 10 + seed), two_moons(t.n_test, t.noise, 1000 + seed)};
  if (t.name == "gaussian_mixture")
    return {gaussian_mixture_task(seed, t.n_train), gaussian_mixture_task(1000 + seed, t.n_test)};
  if (t.name == "linear_pair") return {linear_pair_task(), linear_pair_task()};
  if (t.name == "snowflake_sdf") {
    LabeledDataset g = sdf_grid_dataset(koch_snowflake(t.iterations), {}, t.resolution);
    return {g, g};
  }
  if (t.name == "random_labels") {
    LabeledDataset d = random_label_task(t.n_train, t.min_sep, seed);
    return {d, d};
  }
  fail(ErrorCode::ConfigInvalid, "task.name: unknown task '" + t.name + "'");
}

namespace detail {

inline double opt_number(const io::json& j, const std::string& key, double fallback, const std::string& path) {
  return j.contains(key) ? io::number(j[key], path + "." + key) : fallback;
}

inline std::size_t opt_count(const io::json& j, const std::string& key, std::size_t fallback,
                             const std::string& path) {
  return j.contains(key) ? io::count(j[key], path + "." + key) : fallback;
}

inline void check_keys(const io::json& j, const std::vector<std::string>& allowed, const std::string& path) {
  require(j.is_object(), ErrorCode::ConfigInvalid, path + ": expected an object");
  for (const auto& [key, _] : j.items())
    require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(), ErrorCode::ConfigInvalid,
            path + "." + key + ": unknown key");
}

}  // namespace detail

inline TaskConfig task_from_json(const io::json& j, const std::string& path = "task") {
  TaskConfig t;
  if (j.is_string()) {
    t.name = j.get<std::string>();
  } else {
    detail::check_keys(j, {"name", "n_train", "n_test", "noise", "resolution", "iterations", "min_sep"}, path);
    t.name = io::text(io::field(j, "name", path), path + ".name");
    t.n_train = detail::opt_count(j, "n_train", t.n_train, path);
    t.n_test = detail::opt_count(j, "n_test", t.n_test, path);
    t.noise = detail::opt_number(j, "noise", t.noise, path);
    t.resolution = detail::opt_count(j, "resolution", t.resolution, path);
    t.iterations = detail::opt_count(j, "iterations", t.iterations, path);
    t.min_sep = detail::opt_number(j, "min_sep", t.min_sep, path);
  }
  const auto& names = task_names();
  require(std::find(names.begin(), names.end(), t.name) != names.end(), ErrorCode::ConfigInvalid,
          path + ".name: unknown task '" + t.name + "'");
  require(t.n_train >= 2 && t.n_test >= 2, ErrorCode::ConfigInvalid, path + ": n_train and n_test must be >= 2");
  require(t.noise >= 0.0, ErrorCode::ConfigInvalid, path + ".noise: must be >= 0");
  require(t.resolution >= 2, ErrorCode::ConfigInvalid, path + ".resolution: must be >= 2");
  require(t.iterations <= 8, ErrorCode::ConfigInvalid, path + ".iterations: must be <= 8");
  require(t.min_sep > 0.0, ErrorCode::ConfigInvalid, path + ".min_sep: must be > 0");
  return t;
}

inline NetSpec net_spec_from_json(const io::json& j, const std::string& path = "net") {
  detail::check_keys(j, {"widths", "mode", "activation"}, path);
  NetSpec s;
  const io::json& w = io::field(j, "widths", path);
  require(w.is_array() && w.size() >= 2, ErrorCode::ConfigInvalid, path + ".widths: expected at least two widths");
  s.widths.clear();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t v = io::count(w[i], path + ".widths[" + std::to_string(i) + "]");
    require(v > 0, ErrorCode::ConfigInvalid, path + ".widths[" + std::to_string(i) + "]: must be > 0");
    s.widths.push_back(v);
  }
  const std::string mode = j.contains("mode") ? io::text(j["mode"], path + ".mode") : "constrained";
  require(mode == "constrained" || mode == "unconstrained", ErrorCode::ConfigInvalid,
          path + ".mode: expected constrained or unconstrained");
  s.mode = mode == "constrained" ? Mode::Constrained : Mode::Unconstrained;
  const std::string act = j.contains("activation") ? io::text(j["activation"], path + ".activation")
                          : s.mode == Mode::Constrained ? "groupsort2"
                                                        : "relu";
  require(act == "groupsort2" || act == "relu", ErrorCode::ConfigInvalid,
          path + ".activation: expected groupsort2 or relu");
  s.activation = act == "groupsort2" ? Activation::GroupSort2 : Activation::Relu;
  if (s.activation == Activation::GroupSort2)
    for (std::size_t i = 1; i + 1 < s.widths.size(); ++i)
      require(s.widths[i] % 2 == 0, ErrorCode::ConfigInvalid,
              path + ".widths[" + std::to_string(i) + "]: groupsort2 needs even hidden widths");
  return s;
}

/// One loss object; array-valued tau/alpha/m expand into several specs.
inline std::vector<LossSpec> loss_grid_from_json(const io::json& j, const std::string& path = "loss") {
  if (j.is_array()) {
    std::vector<LossSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto part = loss_grid_from_json(j[i], path + "[" + std::to_string(i) + "]");
      out.insert(out.end(), part.begin(), part.end());
    }
    require(!out.empty(), ErrorCode::ConfigInvalid, path + ": empty loss grid");
    return out;
  }
  detail::check_keys(j, {"kind", "tau", "alpha", "m"}, path);
  const std::string kind = io::text(io::field(j, "kind", path), path + ".kind");
  auto values = [&](const std::string& key, double fallback) {
    if (!j.contains(key)) return Vector{fallback};
    if (j[key].is_array()) {
      Vector v = io::number_list(j[key], path + "." + key);
      require(!v.empty(), ErrorCode::ConfigInvalid, path + "." + key + ": empty list");
      return v;
    }
    return Vector{io::number(j[key], path + "." + key)};
  };
  std::vector<LossSpec> out;
  if (kind == "bce" || kind == "cce") {
    for (double tau : values("tau", 1.0))
      out.push_back(kind == "bce" ? LossSpec{BceTau{tau}} : LossSpec{CceTau{tau}});
  } else if (kind == "hinge") {
    for (double m : values("m", 1.0)) out.push_back(HingeM{m});
  } else if (kind == "wass") {
    out.push_back(Wass{});
  } else if (kind == "hkr" || kind == "mhkr") {
    for (double a : values("alpha", 1.0))
      for (double m : values("m", 1.0))
        out.push_back(kind == "hkr" ? LossSpec{Hkr{a, m}} : LossSpec{MulticlassHkr{a, m}});
  } else if (kind == "mse") {
    out.push_back(Mse{});
  } else {
    fail(ErrorCode::ConfigInvalid, path + ".kind: unknown loss '" + kind + "'");
  }
  for (const auto& l : out) {
    try {
      validate(l);
    } catch (const Error& e) {
      fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
    }
  }
  return out;
}

inline LossSpec loss_from_json(const io::json& j, const std::string& path = "loss") {
  const auto grid = loss_grid_from_json(j, path);
  require(grid.size() == 1, ErrorCode::ConfigInvalid, path + ": expected a single loss, not a grid");
  return grid.front();
}

inline OptimizerCfg optimizer_from_json(const io::json& j, const std::string& path = "optimizer") {
  detail::check_keys(j, {"kind", "lr", "momentum", "beta1", "beta2", "eps_hat", "epochs", "batch_size", "cosine"},
                     path);
  OptimizerCfg o;
  const std::string kind = j.contains("kind") ? io::text(j["kind"], path + ".kind") : "adam";
  require(kind == "adam" || kind == "sgd", ErrorCode::ConfigInvalid, path + ".kind: expected adam or sgd");
  o.kind = kind == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
  o.lr = detail::opt_number(j, "lr", o.lr, path);
  o.momentum = detail::opt_number(j, "momentum", o.momentum, path);
  o.beta1 = detail::opt_number(j, "beta1", o.beta1, path);
  o.beta2 = detail::opt_number(j, "beta2", o.beta2, path);
  o.eps_hat = detail::opt_number(j, "eps_hat", o.eps_hat, path);
  o.epochs = detail::opt_count(j, "epochs", o.epochs, path);
  o.batch_size = detail::opt_count(j, "batch_size", o.batch_size, path);
  if (j.contains("cosine")) {
    require(j["cosine"].is_boolean(), ErrorCode::ConfigInvalid, path + ".cosine: expected true or false");
    o.cosine = j["cosine"].get<bool>();
  }
  try {
    o.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  return o;
}

/// Parses and validates a whole config. Seeds are mandatory.
inline ExperimentConfig config_from_json(const io::json& j) {
  detail::check_keys(j, {"task", "net", "loss", "grid", "optimizer", "seeds", "eps_list", "fractions", "tau_list"},
                     "config");
  ExperimentConfig c;
  c.task = task_from_json(io::field(j, "task", "config"));
  if (j.contains("net")) c.net = net_spec_from_json(j["net"]);
  if (j.contains("loss")) c.loss = loss_from_json(j["loss"]);
  if (j.contains("grid")) c.grid = loss_grid_from_json(j["grid"], "grid");
  if (j.contains("optimizer")) c.optimizer = optimizer_from_json(j["optimizer"]);

  const io::json& seeds = io::field(j, "seeds", "config");
  require(seeds.is_array() && !seeds.empty(), ErrorCode::ConfigInvalid, "config.seeds: expected a nonempty array");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    c.seeds.push_back(io::count(seeds[i], "config.seeds[" + std::to_string(i) + "]"));

  if (j.contains("eps_list")) c.eps_list = io::number_list(j["eps_list"], "config.eps_list");
  for (double e : c.eps_list) require(e >= 0.0, ErrorCode::ConfigInvalid, "config.eps_list: radii must be >= 0");
  if (j.contains("fractions")) c.fractions = io::number_list(j["fractions"], "config.fractions");
  for (double f : c.fractions)
    require(f > 0.0 && f <= 1.0, ErrorCode::ConfigInvalid, "config.fractions: values must lie in (0, 1]");
  if (j.contains("tau_list")) c.tau_list = io::number_list(j["tau_list"], "config.tau_list");
  for (double t : c.tau_list) require(t > 0.0, ErrorCode::ConfigInvalid, "config.tau_list: values must be > 0");
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(io::read_json(path)); }

}  // namespace lipcert
