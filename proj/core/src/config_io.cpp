#include "mflqg/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mflqg/ode.hpp"

namespace mflqg {

using json = nlohmann::json;

namespace {

constexpr const char* kStage = "load_config";

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  throw Error(ErrorKind::SchemaError, kStage, field + ": " + what);
}

const json& require(const json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end()) schema_error(key, "missing required field");
  return *it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) schema_error(field, "expected a number");
  return j.get<double>();
}

Mat parse_matrix(const json& j, const std::string& field, int rows, int cols) {
  if (j.is_number() && rows == 1 && cols == 1) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array()) schema_error(field, "expected a nested array");
  if (static_cast<int>(j.size()) != rows) {
    schema_error(field, "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()));
  }
  Mat out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    const std::string where = field + "[" + std::to_string(r) + "]";
    if (row.is_number() && cols == 1) {
      out(r, 0) = row.get<double>();
      continue;
    }
    if (!row.is_array()) schema_error(where, "expected an array");
    if (static_cast<int>(row.size()) != cols) {
      schema_error(where, "expected " + std::to_string(cols) + " columns, got " + std::to_string(row.size()));
    }
    for (int c = 0; c < cols; ++c) out(r, c) = number(row[c], where + "[" + std::to_string(c) + "]");
  }
  return out;
}

Vec parse_vector(const json& j, const std::string& field, int size) {
  if (j.is_number() && size == 1) return Vec::Constant(1, j.get<double>());
  if (!j.is_array()) schema_error(field, "expected an array");
  if (static_cast<int>(j.size()) != size) {
    schema_error(field, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  }
  Vec out(size);
  for (int i = 0; i < size; ++i) out(i) = number(j[i], field + "[" + std::to_string(i) + "]");
  return out;
}

Coefficient parse_coefficient(const json& j, const std::string& field, int rows, int cols, int steps, bool vec) {
  auto one = [&](const json& v, const std::string& where) -> Mat {
    return vec ? Mat(parse_vector(v, where, rows)) : parse_matrix(v, where, rows, cols);
  };
  if (j.is_object()) {
    auto it = j.find("samples");
    if (it == j.end() || !it->is_array()) schema_error(field, "time-varying entry needs a \"samples\" array");
    if (static_cast<int>(it->size()) != steps + 1) {
      schema_error(field, "expected " + std::to_string(steps + 1) + " samples, got " + std::to_string(it->size()));
    }
    std::vector<Mat> samples;
    samples.reserve(it->size());
    for (std::size_t k = 0; k < it->size(); ++k) samples.push_back(one((*it)[k], field + ".samples[" + std::to_string(k) + "]"));
    return Coefficient(std::move(samples));
  }
  return Coefficient(one(j, field));
}

Mat repair(const Mat& s, const std::string& field, std::vector<std::string>* warnings) {
  const double gap = asymmetry(s);
  if (gap > 1e-8 && warnings) {
    std::ostringstream os;
    os << field << ": asymmetry " << gap << " repaired by symmetrization";
    warnings->push_back(os.str());
  }
  return symmetrize(s);
}

Coefficient repair(const Coefficient& c, const std::string& field, std::vector<std::string>* warnings) {
  std::vector<Mat> out;
  for (std::size_t k = 0; k < c.samples().size(); ++k) {
    out.push_back(repair(c.samples()[k], c.is_constant() ? field : field + "[" + std::to_string(k) + "]", warnings));
  }
  return out.size() == 1 ? Coefficient(std::move(out.front())) : Coefficient(std::move(out));
}

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Mat& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json coefficient_json(const Coefficient& c, bool vec) {
  auto one = [&](const Mat& m) { return vec ? vector_json(m) : matrix_json(m); };
  if (c.is_constant()) return one(c.samples().front());
  json samples = json::array();
  for (const auto& s : c.samples()) samples.push_back(one(s));
  return json{{"samples", std::move(samples)}};
}

}  // namespace

ModelParams parse_config(const std::string& text, std::vector<std::string>* warnings) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, kStage, e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::ParseError, kStage, "top level must be a JSON object");

  ModelParams p;
  const json& jn = require(root, "n");
  const json& jm = require(root, "m");
  if (!jn.is_number_integer() || jn.get<int>() < 1) schema_error("n", "expected a positive integer");
  if (!jm.is_number_integer() || jm.get<int>() < 1) schema_error("m", "expected a positive integer");
  p.n = jn.get<int>();
  p.m = jm.get<int>();
  const double T = number(require(root, "T"), "T");
  const json& js = require(root, "steps");
  if (!js.is_number_integer()) schema_error("steps", "expected an integer");
  try {
    p.grid = TimeGrid(T, js.get<int>());
  } catch (const Error& e) {
    schema_error("T/steps", e.what());
  }
  const int n = p.n, m = p.m, steps = p.grid.steps();

  p.A = parse_coefficient(require(root, "A"), "A", n, n, steps, false);
  p.B = parse_coefficient(require(root, "B"), "B", n, m, steps, false);
  p.C = parse_coefficient(require(root, "C"), "C", n, n, steps, false);
  p.D = parse_coefficient(require(root, "D"), "D", n, m, steps, false);
  p.F = parse_coefficient(require(root, "F"), "F", n, n, steps, false);
  p.Ftilde = parse_coefficient(require(root, "Ftilde"), "Ftilde", n, n, steps, false);
  p.Q = repair(parse_coefficient(require(root, "Q"), "Q", n, n, steps, false), "Q", warnings);
  p.R = repair(parse_coefficient(require(root, "R"), "R", m, m, steps, false), "R", warnings);
  p.Gamma = parse_coefficient(require(root, "Gamma"), "Gamma", n, n, steps, false);
  p.eta = parse_coefficient(require(root, "eta"), "eta", n, 1, steps, true);
  p.G = repair(parse_matrix(require(root, "G"), "G", n, n), "G", warnings);
  p.GammaBar = parse_matrix(require(root, "GammaBar"), "GammaBar", n, n);
  p.etaBar = parse_vector(require(root, "etaBar"), "etaBar", n);
  p.xi0 = parse_vector(require(root, "xi0"), "xi0", n);
  return p;
}

ModelParams load_config(const std::string& path, std::vector<std::string>* warnings) {
  return parse_config(read_file(path), warnings);
}

std::string dump_config(const ModelParams& p) {
  json root;
  root["n"] = p.n;
  root["m"] = p.m;
  root["T"] = p.grid.horizon();
  root["steps"] = p.grid.steps();
  root["A"] = coefficient_json(p.A, false);
  root["B"] = coefficient_json(p.B, false);
  root["C"] = coefficient_json(p.C, false);
  root["D"] = coefficient_json(p.D, false);
  root["F"] = coefficient_json(p.F, false);
  root["Ftilde"] = coefficient_json(p.Ftilde, false);
  root["Q"] = coefficient_json(p.Q, false);
  root["R"] = coefficient_json(p.R, false);
  root["Gamma"] = coefficient_json(p.Gamma, false);
  root["eta"] = coefficient_json(p.eta, true);
  root["G"] = matrix_json(p.G);
  root["GammaBar"] = matrix_json(p.GammaBar);
  root["etaBar"] = vector_json(p.etaBar);
  root["xi0"] = vector_json(p.xi0);
  return root.dump(2) + "\n";
}

void save_config(const ModelParams& params, const std::string& path) { write_file(path, dump_config(params)); }

namespace {

template <class V>
json trajectory_json(const Trajectory<V>& traj, bool vec) {
  json samples = json::array();
  for (const auto& v : traj.values) samples.push_back(vec ? vector_json(v) : matrix_json(v));
  return json{{"samples", std::move(samples)}};
}

MatTrajectory parse_mat_trajectory(const json& root, const char* key, const TimeGrid& grid, int rows, int cols) {
  const Coefficient c = parse_coefficient(require(root, key), key, rows, cols, grid.steps(), false);
  if (c.is_constant()) schema_error(key, "expected sampled values");
  return MatTrajectory(grid, c.samples());
}

VecTrajectory parse_vec_trajectory(const json& root, const char* key, const TimeGrid& grid, int size) {
  const Coefficient c = parse_coefficient(require(root, key), key, size, 1, grid.steps(), true);
  if (c.is_constant()) schema_error(key, "expected sampled values");
  std::vector<Vec> values;
  for (const auto& s : c.samples()) values.push_back(s.col(0));
  return VecTrajectory(grid, std::move(values));
}

}  // namespace

std::string dump_law(const FeedbackLaw& law, const VecTrajectory& xhat) {
  json root;
  root["n"] = law.P.front().rows();
  root["m"] = law.Theta1.front().rows();
  root["T"] = law.P.grid.horizon();
  root["steps"] = law.P.grid.steps();
  root["regularity_margin"] = law.regularity_margin;
  root["P"] = trajectory_json(law.P, false);
  root["phi"] = trajectory_json(law.phi, true);
  root["Theta1"] = trajectory_json(law.Theta1, false);
  root["Theta2"] = trajectory_json(law.Theta2, true);
  root["xhat"] = trajectory_json(xhat, true);
  return root.dump(2) + "\n";
}

LawArtifact parse_law(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "load_law", e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::ParseError, "load_law", "top level must be a JSON object");
  const int n = require(root, "n").get<int>();
  const int m = require(root, "m").get<int>();
  const TimeGrid grid(number(require(root, "T"), "T"), require(root, "steps").get<int>());
  LawArtifact out;
  out.law.regularity_margin = number(require(root, "regularity_margin"), "regularity_margin");
  out.law.P = parse_mat_trajectory(root, "P", grid, n, n);
  out.law.phi = parse_vec_trajectory(root, "phi", grid, n);
  out.law.Theta1 = parse_mat_trajectory(root, "Theta1", grid, m, n);
  out.law.Theta2 = parse_vec_trajectory(root, "Theta2", grid, m);
  out.xhat = parse_vec_trajectory(root, "xhat", grid, n);
  return out;
}

LawArtifact load_law(const std::string& path) { return parse_law(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "read_file", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "write_file", "cannot open " + path);
  out << contents;
  if (!out) throw Error(ErrorKind::IoError, "write_file", "write failed for " + path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace mflqg
