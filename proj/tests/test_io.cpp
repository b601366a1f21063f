#include <gtest/gtest.h>

#include <filesystem>

#include "helpers.hpp"

using namespace lipcert;
using io::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Checkpoint, RoundTripPreservesForward) {
  const LipNet net = make_network({{2, 8, 8, 1}}, 3);
  const LipNet back = io::net_from_json(json::parse(io::to_json(net).dump()));
  EXPECT_EQ(back.mode(), Mode::Constrained);
  const Matrix x = testutil::random_matrix(10, 2, 1);
  EXPECT_EQ(forward(net, x).values(), forward(back, x).values());
  const LipNet relu = make_network({{2, 4, 1}, Mode::Unconstrained, Activation::Relu}, 0);
  EXPECT_TRUE(std::holds_alternative<ReluLayer>(io::net_from_json(io::to_json(relu)).layers()[1]));
}

TEST(Checkpoint, RejectsBadInput) {
  json j = io::to_json(make_network({{2, 4, 1}}, 0));
  j["layers"][0]["rows"] = 5;
  EXPECT_NE(code_of([&] { io::net_from_json(j); }), ErrorCode::InvalidArgument);
  json k = io::to_json(make_network({{2, 4, 1}}, 0));
  k["layers"][0]["constraint"] = "diagonal";
  EXPECT_EQ(code_of([&] { io::net_from_json(k); }), ErrorCode::ConfigInvalid);
}

TEST(DistributionJson, ScalarAtomsAndDefaultWeights) {
  const auto d = io::dist_from_json(json::parse(R"({"atoms": [0, 4, 8]})"), "P");
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.atoms[1], (Vector{4.0}));
  EXPECT_NEAR(d.weights[2], 1.0 / 3.0, 1e-16);
  const auto e = io::dist_from_json(json::parse(R"({"atoms": [[0, 1], [2, 3]], "weights": [0.25, 0.75]})"), "Q");
  EXPECT_EQ(e.dim(), 2u);
  const auto again = io::dist_from_json(io::to_json(e), "Q");
  EXPECT_EQ(again.atoms, e.atoms);
  EXPECT_EQ(again.weights, e.weights);
  EXPECT_EQ(code_of([] { io::dist_from_json(json::parse(R"({"atoms": [0, 1], "weights": [0.5, 0.6]})"), "P"); }),
            ErrorCode::ConfigInvalid);
}

TEST(BoundaryJson, RoundTrip) {
  const auto b = koch_snowflake(2);
  const auto back = io::boundary_from_json(json::parse(io::to_json(b).dump()));
  EXPECT_EQ(back.segments().size(), b.segments().size());
  EXPECT_NEAR(back.perimeter(), b.perimeter(), 1e-12);
}

TEST(Csv, FormatsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.0}) EXPECT_EQ(std::stod(io::fmt(v)), v);
  EXPECT_EQ(io::fmt(NAN), "nan");
  EXPECT_EQ(io::fmt(-INFINITY), "-inf");
}

TEST(Csv, DatasetRoundTrip) {
  const auto d = two_moons(30, 0.1, 4);
  const auto back = io::dataset_from_csv(io::dataset_csv(d));
  EXPECT_EQ(back.points.values(), d.points.values());
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.kind, LabelKind::Binary);
  const auto mc = io::dataset_from_csv("x,label\n0.5,0\n1.5,2\n");
  EXPECT_EQ(mc.kind, LabelKind::Multiclass);
  EXPECT_EQ(mc.num_classes, 3u);
  EXPECT_EQ(code_of([] { io::dataset_from_csv("x,label\n0.5,abc\n"); }), ErrorCode::ConfigInvalid);
}

TEST(Csv, ReportColumns) {
  const auto d = two_moons(4, 0.1, 1);
  const LipNet net = make_network({{2, 4, 1}}, 0);
  const std::string r = io::eval_report_csv(d, forward(net, d.points));
  EXPECT_EQ(r.substr(0, r.find('\n')), "point_id,label,prediction,logit,certificate,pgd_found,pgd_norm");
  EXPECT_EQ(std::count(r.begin(), r.end(), '\n'), 5);
  const std::string h = io::history_csv({EpochRecord{}});
  EXPECT_EQ(h.substr(0, h.find('\n')),
            "epoch,train_loss,train_accuracy,eval_loss,eval_accuracy,mcr,max_spectral_norm,lipschitz_upper_bound");
  const std::string g = io::grid_csv(sdf_grid_dataset(koch_snowflake(0), {}, 3));
  EXPECT_EQ(g.substr(0, g.find('\n')), "x,y,sdf,label");
}

TEST(Files, AtomicWriteAndUnwritableDir) {
  const auto dir = std::filesystem::temp_directory_path() / "lipcert_io_test";
  std::filesystem::remove_all(dir);
  io::ensure_output_dir(dir);
  io::write_atomic(dir / "a.txt", "hello");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "hello");
  EXPECT_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  EXPECT_EQ(code_of([&] { io::write_atomic(dir / "missing" / "b.txt", "x"); }), ErrorCode::OutputUnwritable);
  EXPECT_EQ(code_of([&] { io::ensure_output_dir(dir / "a.txt" / "sub"); }), ErrorCode::OutputUnwritable);
  std::filesystem::remove_all(dir);
}

TEST(Config, ParsesFullConfig) {
  const auto c = config_from_json(json::parse(R"({
    "task": {"name": "two_moons", "n_train": 100, "n_test": 50, "noise": 0.1},
    "net": {"widths": [2, 16, 16, 1]},
    "loss": {"kind": "hkr", "alpha": 10, "m": 0.5},
    "grid": [{"kind": "hkr", "alpha": [1, 10, 100], "m": 0.5}, {"kind": "cce", "tau": [0.25, 4]}],
    "optimizer": {"kind": "sgd", "lr": 0.1, "momentum": 0.9, "epochs": 3, "batch_size": 10},
    "seeds": [0, 1],
    "eps_list": [0.1],
    "fractions": [0.5, 1.0],
    "tau_list": [0.5]
  })"));
  EXPECT_EQ(c.task.n_train, 100u);
  EXPECT_EQ(c.net.widths.size(), 4u);
  ASSERT_TRUE(c.loss.has_value());
  EXPECT_EQ(std::get<Hkr>(*c.loss).alpha, 10.0);
  EXPECT_EQ(c.grid.size(), 5u);
  EXPECT_EQ(c.optimizer.kind, OptimizerKind::Sgd);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1}));
  const auto [tr, te] = make_task(c.task, 0);
  EXPECT_EQ(tr.size(), 100u);
  EXPECT_EQ(te.size(), 50u);
}

TEST(Config, ErrorsNameTheField) {
  auto message = [](const std::string& text) -> std::string {
    try {
      config_from_json(json::parse(text));
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
      return e.what();
    }
    return "";
  };
  EXPECT_NE(message(R"({"task": "two_moons"})").find("config.seeds"), std::string::npos);
  EXPECT_NE(message(R"({"task": "moons", "seeds": [0]})").find("task.name"), std::string::npos);
  EXPECT_NE(message(R"({"task": "two_moons", "seeds": [0], "net": {"widths": [2, 3, 1]}})").find("net.widths[1]"),
            std::string::npos);
  EXPECT_NE(message(R"({"task": "two_moons", "seeds": [0], "loss": {"kind": "bce", "tau": -1}})").find("loss"),
            std::string::npos);
  EXPECT_NE(message(R"({"task": "two_moons", "seeds": [0], "optimizer": {"lr": 0}})").find("optimizer"),
            std::string::npos);
  EXPECT_NE(message(R"({"task": "two_moons", "seeds": [0], "extra": 1})").find("extra"), std::string::npos);
  EXPECT_NE(message(R"({"task": "two_moons", "seeds": [-1]})").find("config.seeds[0]"), std::string::npos);
}
