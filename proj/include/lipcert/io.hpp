#pragma once

// JSON and CSV interchange: network checkpoints, distributions, boundaries,
// grid datasets, histories and evaluation reports.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "lipcert/data.hpp"
#include "lipcert/error.hpp"
#include "lipcert/geometry.hpp"
#include "lipcert/net.hpp"
#include "lipcert/robustness.hpp"
#include "lipcert/train.hpp"
#include "lipcert/transport.hpp"

namespace lipcert::io {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorCode::ConfigInvalid, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(bool(out), ErrorCode::OutputUnwritable, "cannot write " + tmp.string());
    out << content;
    out.flush();
    require(bool(out), ErrorCode::OutputUnwritable, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::OutputUnwritable, "cannot rename onto " + path.string());
  }
}

/// Creates `dir` if needed and checks that files can be created in it.
inline void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), ErrorCode::OutputUnwritable,
          "cannot create output directory " + dir.string());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    require(bool(out), ErrorCode::OutputUnwritable, "output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

// ---------------------------------------------------------------------------
// Field access with path-qualified errors

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  require(j.is_object(), ErrorCode::ConfigInvalid, path + ": expected an object");
  const auto it = j.find(key);
  require(it != j.end(), ErrorCode::ConfigInvalid, path + "." + key + ": missing");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  require(j.is_number(), ErrorCode::ConfigInvalid, path + ": expected a number");
  const double v = j.get<double>();
  require(std::isfinite(v), ErrorCode::ConfigInvalid, path + ": not finite");
  return v;
}

inline std::size_t count(const json& j, const std::string& path) {
  require(j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0), ErrorCode::ConfigInvalid,
          path + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline std::string text(const json& j, const std::string& path) {
  require(j.is_string(), ErrorCode::ConfigInvalid, path + ": expected a string");
  return j.get<std::string>();
}

inline Vector number_list(const json& j, const std::string& path) {
  require(j.is_array(), ErrorCode::ConfigInvalid, path + ": expected an array");
  Vector out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// ---------------------------------------------------------------------------
// Network checkpoints

inline json to_json(const LipNet& net) {
  json layers = json::array();
  for (const auto& l : net.layers()) {
    if (const auto* d = std::get_if<DenseLayer>(&l)) {
      layers.push_back({{"kind", "dense"},
                        {"rows", d->weights.rows()},
                        {"cols", d->weights.cols()},
                        {"constraint", std::string(to_string(d->constraint))},
                        {"weights", d->weights.values()},
                        {"bias", d->bias}});
    } else if (std::holds_alternative<GroupSort2Layer>(l)) {
      layers.push_back({{"kind", "groupsort2"}});
    } else {
      layers.push_back({{"kind", "relu"}});
    }
  }
  return {{"mode", std::string(to_string(net.mode()))}, {"layers", layers}};
}

inline Constraint constraint_from_string(const std::string& s, const std::string& path) {
  for (Constraint c : {Constraint::Orthogonal, Constraint::SpectralNormOnly, Constraint::Unconstrained})
    if (s == to_string(c)) return c;
  fail(ErrorCode::ConfigInvalid, path + ": unknown constraint '" + s + "'");
}

inline LipNet net_from_json(const json& j, const std::string& path = "checkpoint") {
  const std::string mode_name = text(field(j, "mode", path), path + ".mode");
  require(mode_name == "constrained" || mode_name == "unconstrained", ErrorCode::ConfigInvalid,
          path + ".mode: expected constrained or unconstrained");
  const Mode mode = mode_name == "constrained" ? Mode::Constrained : Mode::Unconstrained;
  const json& arr = field(j, "layers", path);
  require(arr.is_array(), ErrorCode::ConfigInvalid, path + ".layers: expected an array");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string lp = path + ".layers[" + std::to_string(i) + "]";
    const std::string kind = text(field(arr[i], "kind", lp), lp + ".kind");
    if (kind == "groupsort2") {
      layers.emplace_back(GroupSort2Layer{});
    } else if (kind == "relu") {
      layers.emplace_back(ReluLayer{});
    } else if (kind == "dense") {
      const std::size_t rows = count(field(arr[i], "rows", lp), lp + ".rows");
      const std::size_t cols = count(field(arr[i], "cols", lp), lp + ".cols");
      Vector w = number_list(field(arr[i], "weights", lp), lp + ".weights");
      require(w.size() == rows * cols, ErrorCode::ConfigInvalid, lp + ".weights: expected rows*cols values");
      DenseLayer d;
      d.weights = Matrix(rows, cols, std::move(w));
      d.bias = number_list(field(arr[i], "bias", lp), lp + ".bias");
      require(d.bias.size() == rows, ErrorCode::ConfigInvalid, lp + ".bias: expected rows values");
      d.constraint = constraint_from_string(text(field(arr[i], "constraint", lp), lp + ".constraint"), lp);
      layers.emplace_back(std::move(d));
    } else {
      fail(ErrorCode::ConfigInvalid, lp + ".kind: unknown layer kind '" + kind + "'");
    }
  }
  try {
    return LipNet(mode, std::move(layers));
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Distributions

inline json to_json(const DiscreteDist& d) { return {{"atoms", d.atoms}, {"weights", d.weights}}; }

/// Weights may be omitted, meaning uniform.
inline DiscreteDist dist_from_json(const json& j, const std::string& path) {
  const json& atoms = field(j, "atoms", path);
  require(atoms.is_array() && !atoms.empty(), ErrorCode::ConfigInvalid, path + ".atoms: expected a nonempty array");
  std::vector<Vector> a;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string ap = path + ".atoms[" + std::to_string(i) + "]";
    a.push_back(atoms[i].is_number() ? Vector{number(atoms[i], ap)} : number_list(atoms[i], ap));
  }
  DiscreteDist d;
  if (j.contains("weights")) {
    d.atoms = std::move(a);
    d.weights = number_list(j["weights"], path + ".weights");
  } else {
    d = DiscreteDist::uniform(std::move(a));
  }
  try {
    d.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Boundaries

inline json to_json(const PolylineBoundary& b) {
  json loops = json::array();
  for (const auto& loop : b.loops()) {
    json l = json::array();
    for (const Point2& p : loop) l.push_back({p.x, p.y});
    loops.push_back(l);
  }
  return loops;
}

inline PolylineBoundary boundary_from_json(const json& j, const std::string& path = "boundary") {
  require(j.is_array(), ErrorCode::ConfigInvalid, path + ": expected a list of loops");
  std::vector<std::vector<Point2>> loops;
  for (std::size_t li = 0; li < j.size(); ++li) {
    const std::string lp = path + "[" + std::to_string(li) + "]";
    require(j[li].is_array(), ErrorCode::ConfigInvalid, lp + ": expected a list of vertices");
    std::vector<Point2> loop;
    for (std::size_t vi = 0; vi < j[li].size(); ++vi) {
      const std::string vp = lp + "[" + std::to_string(vi) + "]";
      const Vector v = number_list(j[li][vi], vp);
      require(v.size() == 2, ErrorCode::ConfigInvalid, vp + ": expected [x, y]");
      loop.push_back({v[0], v[1]});
    }
    loops.push_back(std::move(loop));
  }
  return PolylineBoundary::from_loops(loops);
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal that round-trips to the same double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// x, y, sdf, label
inline std::string grid_csv(const LabeledDataset& grid) {
  require(grid.dim() == 2 && grid.has_targets(), ErrorCode::ShapeMismatch, "grid export needs 2D points with targets");
  std::string out = "x,y,sdf,label\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out += fmt(grid.points(i, 0)) + "," + fmt(grid.points(i, 1)) + "," + fmt(grid.targets[i]) + "," +
           std::to_string(grid.labels[i]) + "\n";
  return out;
}

inline std::string history_csv(const TrainHistory& h) {
  std::string out =
      "epoch,train_loss,train_accuracy,eval_loss,eval_accuracy,mcr,max_spectral_norm,lipschitz_upper_bound\n";
  for (const auto& r : h)
    out += std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.train_accuracy) + "," + fmt(r.eval_loss) +
           "," + fmt(r.eval_accuracy) + "," + fmt(r.mcr) + "," + fmt(r.max_spectral_norm) + "," +
           fmt(r.lipschitz_upper_bound) + "\n";
  return out;
}

/// point_id, label, prediction, logit columns (one per output), certificate,
/// pgd_found, pgd_norm. Attack columns stay empty when `attacks` is empty.
inline std::string eval_report_csv(const LabeledDataset& data, const Matrix& logits,
                                   const std::vector<AttackResult>& attacks = {}) {
  const std::size_t k = logits.cols();
  std::string out = "point_id,label,prediction,";
  if (k == 1) out += "logit,";
  else
    for (std::size_t c = 0; c < k; ++c) out += "logit_" + std::to_string(c) + ",";
  out += "certificate,pgd_found,pgd_norm\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = logits.row(i);
    out += std::to_string(i) + "," + std::to_string(data.labels[i]) + "," + std::to_string(predict(row)) + ",";
    for (double v : row) out += fmt(v) + ",";
    out += fmt(certificate_radius(row)) + ",";
    if (attacks.empty()) out += ",\n";
    else out += std::string(attacks[i].found ? "1" : "0") + "," + fmt(attacks[i].norm) + "\n";
  }
  return out;
}

/// Points from a CSV with a header row: feature columns, then a label.
inline LabeledDataset dataset_from_csv(const std::string& content, const std::string& path = "data") {
  std::istringstream in(content);
  std::string line;
  require(bool(std::getline(in, line)), ErrorCode::ConfigInvalid, path + ": empty file");
  std::vector<Vector> rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    Vector vals;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      double v = 0.0;
      const char* b = cell.data();
      const char* e = b + cell.size();
      while (e > b && (e[-1] == '\r' || e[-1] == ' ')) --e;
      while (b < e && *b == ' ') ++b;
      const auto r = std::from_chars(b, e, v);
      require(r.ec == std::errc() && r.ptr == e, ErrorCode::ConfigInvalid,
              path + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      vals.push_back(v);
    }
    require(vals.size() >= 2, ErrorCode::ConfigInvalid, path + ":" + std::to_string(line_no) + ": too few columns");
    labels.push_back(int(vals.back()));
    vals.pop_back();
    require(rows.empty() || rows.front().size() == vals.size(), ErrorCode::ConfigInvalid,
            path + ":" + std::to_string(line_no) + ": column count differs");
    rows.push_back(std::move(vals));
  }
  require(!rows.empty(), ErrorCode::ConfigInvalid, path + ": no data rows");
  LabeledDataset d;
  d.points = Matrix(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), d.points.row(i).begin());
  d.labels = std::move(labels);
  bool binary = true;
  int max_label = 0;
  for (int y : d.labels) {
    binary = binary && (y == 1 || y == -1);
    max_label = std::max(max_label, y);
  }
  if (!binary) {
    d.kind = LabelKind::Multiclass;
    d.num_classes = std::size_t(max_label) + 1;
  }
  try {
    d.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  return d;
}

/// Feature columns x0.., then label.
inline std::string dataset_csv(const LabeledDataset& d) {
  std::string out;
  for (std::size_t j = 0; j < d.dim(); ++j) out += "x" + std::to_string(j) + ",";
  out += "label\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.points.row(i)) out += fmt(v) + ",";
    out += std::to_string(d.labels[i]) + "\n";
  }
  return out;
}

}  // namespace lipcert::io
