// lipcert: command-line front end for the experiments and oracles.
//
// Exit status: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lipcert/lipcert.hpp"

namespace fs = std::filesystem;
using namespace lipcert;
using io::json;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

bool is_validation(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidDistribution:
    case ErrorCode::InvalidBoundary:
    case ErrorCode::UnsupportedWeights:
    case ErrorCode::BadClassIndex:
    case ErrorCode::ShapeMismatch:
      return true;
    default:
      return false;
  }
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

// Overrides shared by the config-driven commands.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size;
  std::optional<double> lr, tau, alpha, m;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Run a single seed instead of the config list");
    cmd->add_option("--epochs", epochs, "Override optimizer.epochs");
    cmd->add_option("--batch-size", batch_size, "Override optimizer.batch_size");
    cmd->add_option("--lr", lr, "Override optimizer.lr");
    cmd->add_option("--tau", tau, "Override loss.tau");
    cmd->add_option("--alpha", alpha, "Override loss.alpha");
    cmd->add_option("--m", m, "Override loss.m");
  }

  void apply(ExperimentConfig& c) const {
    if (seed) c.seeds = {*seed};
    if (epochs) c.optimizer.epochs = *epochs;
    if (batch_size) c.optimizer.batch_size = *batch_size;
    if (lr) c.optimizer.lr = *lr;
    if (c.loss) {
      std::visit(
          [&](auto& s) {
            if constexpr (requires { s.tau; })
              if (tau) s.tau = *tau;
            if constexpr (requires { s.alpha; })
              if (alpha) s.alpha = *alpha;
            if constexpr (requires { s.m; })
              if (m) s.m = *m;
          },
          *c.loss);
    }
    try {
      if (c.loss) validate(*c.loss);
      c.optimizer.validate();
    } catch (const Error& e) {
      fail(ErrorCode::ConfigInvalid, std::string("override: ") + e.what());
    }
  }
};

ExperimentConfig load(const std::string& path, const Overrides& o) {
  ExperimentConfig c = load_config(path);
  o.apply(c);
  return c;
}

/// Adjusts a binary task to a multiclass loss and checks the net shape.
void fit_task(LabeledDataset& train_set, LabeledDataset& test_set, const ExperimentConfig& c, const LossSpec& loss) {
  if (is_multiclass(loss) && train_set.kind == LabelKind::Binary) {
    train_set = to_two_class(train_set);
    test_set = to_two_class(test_set);
  }
  const std::size_t out = is_multiclass(loss) ? train_set.num_classes : 1;
  require(c.net.widths.front() == train_set.dim(), ErrorCode::ConfigInvalid,
          "net.widths[0]: task has input dimension " + std::to_string(train_set.dim()));
  require(c.net.widths.back() == out, ErrorCode::ConfigInvalid,
          "net.widths: last width must be " + std::to_string(out) + " for " + describe(loss));
}

std::vector<std::size_t> hidden_of(const NetSpec& s) { return {s.widths.begin() + 1, s.widths.end() - 1}; }

// ---------------------------------------------------------------------------

int cmd_train(const std::string& config, const Overrides& o, const fs::path& out) {
  const ExperimentConfig c = load(config, o);
  require(c.loss.has_value(), ErrorCode::ConfigInvalid, "config.loss: missing");
  {
    auto [a, b] = make_task(c.task, c.seeds.front());
    fit_task(a, b, c, *c.loss);
  }
  io::ensure_output_dir(out);

  json runs = json::array();
  std::string summary = "seed,epochs,train_loss,test_loss,test_accuracy,mcr,average_certificate,lipschitz_upper_bound\n";
  for (std::uint64_t seed : c.seeds) {
    auto [train_set, test_set] = make_task(c.task, seed);
    fit_task(train_set, test_set, c, *c.loss);
    LipNet net = make_network(c.net, 100 + seed);
    OptimizerCfg opt = c.optimizer;
    opt.seed = seed;
    const TrainHistory h = train(net, train_set, *c.loss, opt, &test_set);
    const NetModel model(net);
    const Evaluation te = evaluate(net, test_set, *c.loss);
    const double cert = net.mode() == Mode::Constrained ? average_certificate(model, test_set) : 0.0;
    const std::string tag = "seed" + std::to_string(seed);
    io::write_atomic(out / ("history_" + tag + ".csv"), io::history_csv(h));
    io::write_atomic(out / ("checkpoint_" + tag + ".json"), io::to_json(net).dump() + "\n");
    const double train_loss = h.empty() ? evaluate(net, train_set, *c.loss).loss : h.back().train_loss;
    summary += std::to_string(seed) + "," + std::to_string(h.size()) + "," + io::fmt(train_loss) + "," +
               io::fmt(te.loss) + "," + io::fmt(te.accuracy) + "," + io::fmt(te.mcr) + "," + io::fmt(cert) + "," +
               io::fmt(lipschitz_upper_bound(net)) + "\n";
    runs.push_back({{"seed", seed}, {"test_accuracy", te.accuracy}, {"mcr", te.mcr}, {"test_loss", te.loss}});
  }
  io::write_atomic(out / "summary.csv", summary);
  print({{"loss", describe(*c.loss)}, {"runs", runs}});
  return 0;
}

int cmd_pareto(const std::string& config, const Overrides& o, const fs::path& out) {
  const ExperimentConfig c = load(config, o);
  std::vector<LossSpec> grid = c.grid;
  if (grid.empty() && c.loss) grid = {*c.loss};
  require(!grid.empty(), ErrorCode::ConfigInvalid, "config.grid: missing (or give a single loss)");
  require(c.net.mode == Mode::Constrained, ErrorCode::ConfigInvalid, "net.mode: pareto sweeps need constrained nets");
  {
    auto [a, b] = make_task(c.task, c.seeds.front());
    require(a.kind == LabelKind::Binary, ErrorCode::ConfigInvalid, "task: pareto sweeps expect a binary task");
    require(c.net.widths.front() == a.dim(), ErrorCode::ConfigInvalid,
            "net.widths[0]: task has input dimension " + std::to_string(a.dim()));
  }
  io::ensure_output_dir(out);

  SweepSettings s;
  s.hidden = hidden_of(c.net);
  s.opt = c.optimizer;
  s.seeds = c.seeds;
  s.eps_list = c.eps_list;
  const TaskConfig task = c.task;
  const auto rows = pareto_sweep([&](std::uint64_t seed) { return make_task(task, seed); }, grid, s);

  std::string csv = "loss,clean_accuracy,";
  for (double e : s.eps_list) csv += "robust_accuracy_eps_" + io::fmt(e) + ",";
  csv += "mcr,average_certificate\n";
  json table = json::array();
  for (const auto& r : rows) {
    csv += "\"" + describe(r.loss) + "\"," + io::fmt(r.clean_accuracy) + ",";
    for (double v : r.robust_accuracy) csv += io::fmt(v) + ",";
    csv += io::fmt(r.mcr) + "," + io::fmt(r.average_certificate) + "\n";
    table.push_back({{"loss", describe(r.loss)},
                     {"clean_accuracy", r.clean_accuracy},
                     {"robust_accuracy", r.robust_accuracy},
                     {"mcr", r.mcr},
                     {"average_certificate", r.average_certificate}});
  }
  io::write_atomic(out / "summary.csv", csv);
  print({{"eps_list", s.eps_list}, {"rows", table}});
  return 0;
}

int cmd_consistency(const std::string& config, const Overrides& o, const fs::path& out, std::size_t steps,
                    bool baseline) {
  ExperimentConfig c = load(config, o);
  if (c.fractions.empty()) c.fractions = {0.05, 1.0};
  if (c.tau_list.empty()) c.tau_list = {0.5};
  require(steps >= 1, ErrorCode::ConfigInvalid, "--steps must be >= 1");
  const auto [base, test] = make_task(c.task, c.seeds.front());
  require(base.kind == LabelKind::Binary, ErrorCode::ConfigInvalid, "task: consistency expects a binary task");
  io::ensure_output_dir(out);

  ConsistencySettings s;
  s.hidden = hidden_of(c.net);
  s.lr = c.optimizer.lr;
  s.batch_size = c.optimizer.batch_size;
  s.steps = steps;
  s.unconstrained_baseline = baseline;
  const auto rows = consistency_experiment(c.fractions, c.tau_list, base, test, c.seeds, s);

  std::string csv = "fraction,n,tau,seed,mode,train_loss,test_loss,loss_gap,train_accuracy,test_accuracy\n";
  for (const auto& r : rows)
    csv += io::fmt(r.fraction) + "," + std::to_string(r.n) + "," + io::fmt(r.tau) + "," + std::to_string(r.seed) +
           "," + std::string(to_string(r.mode)) + "," + io::fmt(r.train_loss) + "," + io::fmt(r.test_loss) + "," +
           io::fmt(r.loss_gap()) + "," + io::fmt(r.train_accuracy) + "," + io::fmt(r.test_accuracy) + "\n";
  io::write_atomic(out / "summary.csv", csv);

  json medians = json::array();
  for (double f : c.fractions)
    for (double tau : c.tau_list) {
      json m{{"fraction", f}, {"tau", tau}, {"constrained_gap", median_gap(rows, f, tau, Mode::Constrained)}};
      if (baseline) m["unconstrained_gap"] = median_gap(rows, f, tau, Mode::Unconstrained);
      medians.push_back(m);
    }
  print({{"median_gaps", medians}});
  return 0;
}

int cmd_diverge(std::size_t epochs, std::size_t linear_steps, double linear_lr, std::uint64_t seed,
                const std::optional<fs::path>& out) {
  require(linear_lr > 0.0, ErrorCode::InvalidArgument, "--linear-lr must be > 0");
  if (out) io::ensure_output_dir(*out);
  DivergenceSettings s;
  s.linear_steps = linear_steps;
  s.linear_lr = linear_lr;
  s.seed = seed;
  const DivergenceResult r = divergence_experiment(epochs, s);
  if (out) {
    std::string csv = "step,abs_w,loss\n";
    for (std::size_t i = 0; i < r.linear_w.size(); ++i)
      csv += std::to_string(i + 1) + "," + io::fmt(r.linear_w[i]) + "," + io::fmt(r.linear[i].train_loss) + "\n";
    io::write_atomic(*out / "linear.csv", csv);
    io::write_atomic(*out / "unconstrained.csv", io::history_csv(r.unconstrained));
    io::write_atomic(*out / "constrained.csv", io::history_csv(r.constrained));
  }
  double control_max = 0.0;
  for (const auto& e : r.constrained) control_max = std::max(control_max, e.lipschitz_upper_bound);
  json j{{"linear_abs_w", r.linear_w.empty() ? 0.0 : r.linear_w.back()},
         {"linear_loss", r.linear.empty() ? 0.0 : r.linear.back().train_loss},
         {"unconstrained_max_spectral_norm", r.unconstrained.empty() ? 0.0 : r.unconstrained.back().max_spectral_norm},
         {"constrained_max_lipschitz_bound", control_max}};
  print(j);
  return 0;
}

int cmd_sdf_fit(std::size_t resolution, std::optional<double> stop_mae, std::size_t iterations,
                std::size_t max_epochs, std::uint64_t seed, const std::optional<fs::path>& out) {
  require(resolution >= 2, ErrorCode::InvalidArgument, "--resolution must be >= 2");
  require(iterations <= 8, ErrorCode::InvalidArgument, "--iterations must be <= 8");
  const double stop = stop_mae.value_or(pixel_mae(resolution));
  require(stop > 0.0, ErrorCode::InvalidArgument, "--stop-mae must be > 0");
  if (out) io::ensure_output_dir(*out);
  SdfFitSettings s;
  s.iterations = iterations;
  s.max_epochs = max_epochs;
  s.seed = seed;
  const SdfFitResult r = sdf_fit_experiment(resolution, stop, s);
  if (out) {
    io::write_atomic(*out / "history.csv", io::history_csv(r.history));
    io::write_atomic(*out / "checkpoint.json", io::to_json(r.net).dump() + "\n");
  }
  print({{"final_mae", r.final_mae}, {"stop_mae", stop}, {"epochs", r.epochs}, {"budget_exhausted", r.budget_exhausted}});
  return r.budget_exhausted ? kExitRuntime : 0;
}

LabeledDataset eval_data(const std::optional<std::string>& data, const std::optional<std::string>& config,
                         const Overrides& o) {
  require(data.has_value() != config.has_value(), ErrorCode::ConfigInvalid, "give exactly one of --data or --config");
  if (data) return io::dataset_from_csv(io::read_file(*data), *data);
  const ExperimentConfig c = load(*config, o);
  return make_task(c.task, c.seeds.front()).second;
}

LabeledDataset match_net(LabeledDataset d, const LipNet& net) {
  if (net.output_dim() > 1 && d.kind == LabelKind::Binary) d = to_two_class(d);
  require(d.dim() == net.input_dim(), ErrorCode::ShapeMismatch, "data dimension does not match the checkpoint");
  if (d.kind == LabelKind::Multiclass)
    require(d.num_classes <= net.output_dim(), ErrorCode::ShapeMismatch, "more classes than network outputs");
  else
    require(net.output_dim() == 1, ErrorCode::ShapeMismatch, "binary labels need a scalar-output network");
  return d;
}

int cmd_certify(const std::string& checkpoint, const std::optional<std::string>& data,
                const std::optional<std::string>& config, const Overrides& o, std::vector<double> eps_list,
                const std::optional<fs::path>& out) {
  const LipNet net = io::net_from_json(io::read_json(checkpoint));
  require(net.mode() == Mode::Constrained, ErrorCode::UnconstrainedNet, "certificates need a constrained checkpoint");
  LabeledDataset d = match_net(eval_data(data, config, o), net);
  for (double e : eps_list) require(e >= 0.0, ErrorCode::InvalidArgument, "--eps values must be >= 0");
  if (out) io::ensure_output_dir(*out);
  const NetModel model(net);
  const Matrix logits = model.logits(d.points);
  if (out) io::write_atomic(*out / "report.csv", io::eval_report_csv(d, logits));
  json robust = json::object();
  for (double e : eps_list) robust[io::fmt(e)] = robust_accuracy(model, d, e, RobustMode::Certified);
  print({{"points", d.size()},
         {"accuracy", accuracy(model, d)},
         {"average_certificate", average_certificate(model, d)},
         {"mean_certifiable_robustness", mean_certifiable_robustness(model, d)},
         {"certified_accuracy", robust}});
  return 0;
}

int cmd_attack(const std::string& checkpoint, const std::optional<std::string>& data,
               const std::optional<std::string>& config, const Overrides& o, std::optional<double> eps,
               std::optional<double> cert_fraction, const PgdSettings& pgd, const std::optional<fs::path>& out) {
  const LipNet net = io::net_from_json(io::read_json(checkpoint));
  LabeledDataset d = match_net(eval_data(data, config, o), net);
  require(eps.has_value() != cert_fraction.has_value(), ErrorCode::InvalidArgument,
          "give exactly one of --eps or --cert-fraction");
  if (eps) require(*eps >= 0.0, ErrorCode::InvalidArgument, "--eps must be >= 0");
  if (cert_fraction) {
    require(*cert_fraction > 0.0, ErrorCode::InvalidArgument, "--cert-fraction must be > 0");
    require(net.mode() == Mode::Constrained, ErrorCode::UnconstrainedNet, "--cert-fraction needs a constrained net");
  }
  require(pgd.steps >= 1 && pgd.restarts >= 1, ErrorCode::InvalidArgument, "--steps and --restarts must be >= 1");
  if (out) io::ensure_output_dir(*out);

  const NetModel model(net);
  const Matrix logits = model.logits(d.points);
  Vector radii(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    radii[i] = eps ? *eps : *cert_fraction * certificate_radius(logits.row(i));
  std::vector<int> pred(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) pred[i] = predict(logits.row(i));
  const auto attacks = pgd_l2_batch(model, d.points, pred, radii, pgd);
  std::size_t flipped = 0, violations = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    flipped += attacks[i].found;
    if (net.mode() == Mode::Constrained)
      violations += attacks[i].found && attacks[i].norm < certificate_radius(logits.row(i));
  }
  if (out) io::write_atomic(*out / "report.csv", io::eval_report_csv(d, logits, attacks));
  print({{"points", d.size()}, {"flipped", flipped}, {"certificate_violations", violations}});
  return violations ? kExitRuntime : 0;
}

int cmd_wass(const std::string& input, bool fit, std::uint64_t seed) {
  const json j = io::read_json(input);
  const DiscreteDist p = io::dist_from_json(io::field(j, "P", "input"), "input.P");
  const DiscreteDist q = io::dist_from_json(io::field(j, "Q", "input"), "input.Q");
  require(p.dim() == q.dim(), ErrorCode::ConfigInvalid, "input: P and Q atoms have different dimensions");
  const double w1 = p.dim() == 1 ? w1_exact_1d(p, q) : w1_exact_assignment(p, q);
  json r{{"w1", w1}};
  if (fit) {
    DualFitSettings s;
    s.seed = seed;
    s.target = 0.99 * w1;
    r["dual"] = kr_dual_fit(p, q, s).dual;
  }
  print(r);
  return 0;
}

int cmd_snowflake(std::size_t iterations, std::optional<std::size_t> resolution, const std::optional<fs::path>& out) {
  require(iterations <= 8, ErrorCode::InvalidArgument, "--iterations must be <= 8");
  if (resolution) require(*resolution >= 2, ErrorCode::InvalidArgument, "--resolution must be >= 2");
  require(!resolution || out, ErrorCode::InvalidArgument, "--resolution needs --out");
  const PolylineBoundary b = koch_snowflake(iterations);
  if (!out) {
    std::cout << io::to_json(b).dump() << "\n";
    return 0;
  }
  io::ensure_output_dir(*out);
  io::write_atomic(*out / "boundary.json", io::to_json(b).dump() + "\n");
  if (resolution) io::write_atomic(*out / "grid.csv", io::grid_csv(sdf_grid_dataset(b, {}, *resolution)));
  print({{"segments", b.segments().size()}, {"perimeter", b.perimeter()}});
  return 0;
}

int cmd_pack_bounds(double m, std::size_t n, double vol_x, double vol_ball) {
  const PackingBounds pb = packing_bounds(m, n, vol_x, vol_ball);
  std::cout << json{{"lower", pb.lower}, {"upper", pb.upper}}.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certifiable 1-Lipschitz classifiers: experiments and oracles"};
  app.require_subcommand(1);
  std::function<int()> run;

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one net per seed from a config");
  std::string train_config;
  fs::path train_out = "out";
  Overrides train_o;
  train_cmd->add_option("--config", train_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "Output directory");
  train_o.attach(train_cmd);
  train_cmd->callback([&] { run = [&] { return cmd_train(train_config, train_o, train_out); }; });

  // pareto
  auto* pareto_cmd = app.add_subcommand("pareto", "Sweep a loss grid and tabulate accuracy against robustness");
  std::string pareto_config;
  fs::path pareto_out = "out";
  Overrides pareto_o;
  pareto_cmd->add_option("--config", pareto_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  pareto_cmd->add_option("--out", pareto_out, "Output directory");
  pareto_o.attach(pareto_cmd);
  pareto_cmd->callback([&] { run = [&] { return cmd_pareto(pareto_config, pareto_o, pareto_out); }; });

  // consistency
  auto* cons_cmd = app.add_subcommand("consistency", "Train/test loss gap against training-set size");
  std::string cons_config;
  fs::path cons_out = "out";
  Overrides cons_o;
  std::size_t cons_steps = 2000;
  bool cons_no_baseline = false;
  cons_cmd->add_option("--config", cons_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cons_cmd->add_option("--out", cons_out, "Output directory");
  cons_cmd->add_option("--steps", cons_steps, "Optimizer updates per run");
  cons_cmd->add_flag("--no-baseline", cons_no_baseline, "Skip the unconstrained baseline");
  cons_o.attach(cons_cmd);
  cons_cmd->callback(
      [&] { run = [&] { return cmd_consistency(cons_config, cons_o, cons_out, cons_steps, !cons_no_baseline); }; });

  // diverge
  auto* div_cmd = app.add_subcommand("diverge", "Weight growth of unconstrained BCE training");
  std::size_t div_epochs = 200, div_linear_steps = 30000;
  double div_linear_lr = 1.0;
  std::uint64_t div_seed = 0;
  std::optional<fs::path> div_out;
  div_cmd->add_option("--epochs", div_epochs, "Epochs for the two network runs");
  div_cmd->add_option("--linear-steps", div_linear_steps, "Full-batch steps for the linear model");
  div_cmd->add_option("--linear-lr", div_linear_lr, "Learning rate for the linear model");
  div_cmd->add_option("--seed", div_seed, "Seed");
  div_cmd->add_option("--out", div_out, "Output directory");
  div_cmd->callback(
      [&] { run = [&] { return cmd_diverge(div_epochs, div_linear_steps, div_linear_lr, div_seed, div_out); }; });

  // sdf-fit
  auto* sdf_cmd = app.add_subcommand("sdf-fit", "Regress a constrained net onto the snowflake SDF");
  std::size_t sdf_res = 100, sdf_iter = 4, sdf_epochs = 40;
  std::optional<double> sdf_stop;
  std::uint64_t sdf_seed = 0;
  std::optional<fs::path> sdf_out;
  sdf_cmd->add_option("--resolution", sdf_res, "Grid resolution per axis");
  sdf_cmd->add_option("--stop-mae", sdf_stop, "Stop once grid MAE falls below this (default: one pixel)");
  sdf_cmd->add_option("--iterations", sdf_iter, "Snowflake refinement level");
  sdf_cmd->add_option("--max-epochs", sdf_epochs, "Epoch budget");
  sdf_cmd->add_option("--seed", sdf_seed, "Seed");
  sdf_cmd->add_option("--out", sdf_out, "Output directory");
  sdf_cmd->callback(
      [&] { run = [&] { return cmd_sdf_fit(sdf_res, sdf_stop, sdf_iter, sdf_epochs, sdf_seed, sdf_out); }; });

  // certify
  auto* cert_cmd = app.add_subcommand("certify", "Certificates of a checkpoint on a dataset");
  std::string cert_ckpt;
  std::optional<std::string> cert_data, cert_config;
  std::vector<double> cert_eps;
  std::optional<fs::path> cert_out;
  Overrides cert_o;
  cert_cmd->add_option("--checkpoint", cert_ckpt, "Network checkpoint (JSON)")->required()->check(CLI::ExistingFile);
  cert_cmd->add_option("--data", cert_data, "CSV: feature columns then label")->check(CLI::ExistingFile);
  cert_cmd->add_option("--config", cert_config, "Use the test set of a config task")->check(CLI::ExistingFile);
  cert_cmd->add_option("--eps", cert_eps, "Radii for certified accuracy");
  cert_cmd->add_option("--out", cert_out, "Output directory for report.csv");
  cert_o.attach(cert_cmd);
  cert_cmd->callback(
      [&] { run = [&] { return cmd_certify(cert_ckpt, cert_data, cert_config, cert_o, cert_eps, cert_out); }; });

  // attack
  auto* atk_cmd = app.add_subcommand("attack", "L2 PGD against a checkpoint");
  std::string atk_ckpt;
  std::optional<std::string> atk_data, atk_config;
  std::optional<double> atk_eps, atk_frac;
  PgdSettings atk_pgd;
  std::optional<fs::path> atk_out;
  Overrides atk_o;
  atk_cmd->add_option("--checkpoint", atk_ckpt, "Network checkpoint (JSON)")->required()->check(CLI::ExistingFile);
  atk_cmd->add_option("--data", atk_data, "CSV: feature columns then label")->check(CLI::ExistingFile);
  atk_cmd->add_option("--config", atk_config, "Use the test set of a config task")->check(CLI::ExistingFile);
  atk_cmd->add_option("--eps", atk_eps, "Attack radius for every point");
  atk_cmd->add_option("--cert-fraction", atk_frac, "Attack radius as a multiple of each certificate");
  atk_cmd->add_option("--steps", atk_pgd.steps, "PGD steps");
  atk_cmd->add_option("--restarts", atk_pgd.restarts, "PGD restarts");
  atk_cmd->add_option("--seed", atk_pgd.seed, "Seed for random restarts");
  atk_cmd->add_option("--out", atk_out, "Output directory for report.csv");
  atk_cmd->callback([&] {
    run = [&] { return cmd_attack(atk_ckpt, atk_data, atk_config, atk_o, atk_eps, atk_frac, atk_pgd, atk_out); };
  });

  // wass
  auto* wass_cmd = app.add_subcommand("wass", "Exact W1 between two discrete distributions");
  std::string wass_input;
  bool wass_fit = false;
  std::uint64_t wass_seed = 0;
  wass_cmd->add_option("--input", wass_input, "JSON {\"P\": dist, \"Q\": dist}")->required()->check(CLI::ExistingFile);
  wass_cmd->add_flag("--fit", wass_fit, "Also train a dual potential and report its estimate");
  wass_cmd->add_option("--seed", wass_seed, "Seed for --fit");
  wass_cmd->callback([&] { run = [&] { return cmd_wass(wass_input, wass_fit, wass_seed); }; });

  // snowflake
  auto* snow_cmd = app.add_subcommand("snowflake", "Von Koch snowflake boundary and SDF grid");
  std::size_t snow_iter = 4;
  std::optional<std::size_t> snow_res;
  std::optional<fs::path> snow_out;
  snow_cmd->add_option("--iterations", snow_iter, "Refinement level");
  snow_cmd->add_option("--resolution", snow_res, "Also write grid.csv at this resolution");
  snow_cmd->add_option("--out", snow_out, "Output directory (boundary printed to stdout otherwise)");
  snow_cmd->callback([&] { run = [&] { return cmd_snowflake(snow_iter, snow_res, snow_out); }; });

  // pack-bounds
  auto* pack_cmd = app.add_subcommand("pack-bounds", "Packing-number bounds for margin classifiers");
  double pack_m = 0, pack_vx = 0, pack_vb = 0;
  std::size_t pack_n = 0;
  pack_cmd->add_option("--m", pack_m, "Margin")->required();
  pack_cmd->add_option("--n", pack_n, "Dimension")->required();
  pack_cmd->add_option("--vol-x", pack_vx, "Volume of the domain")->required();
  pack_cmd->add_option("--vol-ball", pack_vb, "Volume of the unit ball")->required();
  pack_cmd->callback([&] { run = [&] { return cmd_pack_bounds(pack_m, pack_n, pack_vx, pack_vb); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    return run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.code()) ? kExitInvalid : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
