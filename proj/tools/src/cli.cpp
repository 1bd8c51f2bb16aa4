#include "mflqg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "mflqg/mflqg.hpp"

namespace mflqg::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 20240917;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(num(v)); }

std::vector<int> parse_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || value < 1) {
      throw Error(ErrorKind::InvalidArgument, "cli", "bad entry '" + item + "' in N list");
    }
    out.push_back(value);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "cli", "empty N list");
  return out;
}

Mat parse_matrix_file(const std::string& path, int n) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, "cli", path + ": " + e.what());
  }
  if (j.is_number() && n == 1) return Mat::Constant(1, 1, j.get<double>());
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw Error(ErrorKind::SchemaError, "cli", path + ": expected an " + std::to_string(n) + "x" + std::to_string(n) +
                                                   " matrix");
  }
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) {
      throw Error(ErrorKind::SchemaError, "cli", path + ": row " + std::to_string(i) + " has the wrong length");
    }
    for (int k = 0; k < n; ++k) {
      if (!j[i][k].is_number()) throw Error(ErrorKind::SchemaError, "cli", path + ": non-numeric entry");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

struct LoadedConfig {
  ModelParams params;
  std::string text;
  std::string hash;
  std::vector<std::string> warnings;
};

LoadedConfig load(const std::string& path) {
  LoadedConfig c;
  c.text = read_file(path);
  c.params = parse_config(c.text, &c.warnings);
  c.hash = hex64(fnv1a64(c.text));
  return c;
}

LoadedConfig builtin(int steps) {
  LoadedConfig c;
  c.params = builtin_example_params(steps);
  c.text = dump_config(c.params);
  c.hash = hex64(fnv1a64(c.text));
  return c;
}

json verdict_json(const ConvexityVerdict& v) {
  json w = json::object();
  for (const auto& [k, x] : v.witness) w[k] = number(x);
  return {{"status", std::string(to_string(v.status))}, {"criterion", v.criterion}, {"reason", v.reason},
          {"witness", w}};
}

json convexity_json(const ModelParams& p, const Mat& dQ, const Mat& dG) {
  json out;
  out["psd"] = verdict_json(check_psd_case(p));
  try {
    out["decoupled"] = verdict_json(check_decoupled_indefinite(p, dQ, dG));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::CouplingPresent) throw;
    out["decoupled"] = {{"status", "NotApplicable"}, {"reason", e.what()}};
  }
  out["coupled"] = verdict_json(check_coupled_indefinite(p, dQ));
  bool uniform = false;
  for (const char* key : {"psd", "decoupled", "coupled"}) {
    uniform = uniform || out[key]["status"] == "UniformlyConvex";
  }
  out["uniformly_convex"] = uniform;
  return out;
}

// Owns an output directory: artifacts are registered as they are written and
// the manifest is emitted last.
class RunDir {
 public:
  RunDir(std::string command, const std::string& dir, const LoadedConfig& config)
      : command_(std::move(command)), dir_(dir), start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cli", "cannot create " + dir_.string() + ": " + ec.message());
    manifest_["command"] = command_;
    manifest_["config_hash"] = config.hash;
    manifest_["grid"] = {{"T", config.params.grid.horizon()},
                         {"steps", config.params.grid.steps()},
                         {"dt", config.params.grid.dt()}};
    manifest_["version"] = MFLQG_VERSION;
    manifest_["seed"] = nullptr;
    manifest_["artifacts"] = json::array();
    write("config.json", config.text);
  }

  void write(const std::string& name, const std::string& contents) {
    write_file((dir_ / name).string(), contents);
    manifest_["artifacts"].push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  json& manifest() { return manifest_; }

  void finish() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest_["wall_time_seconds"] = std::chrono::duration<double>(elapsed).count();
    write_file((dir_ / "manifest.json").string(), manifest_.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  json manifest_;
};

std::string vec_header(const std::string& prefix, int n) {
  std::string out;
  for (int i = 1; i <= n; ++i) out += "," + prefix + "_" + std::to_string(i);
  return out;
}

std::string mean_field_csv(const CCSolution& cc, int n) {
  std::string out = "t" + vec_header("xhat", n) + "\n";
  for (std::size_t k = 0; k < cc.mean.xhat.size(); ++k) {
    out += num(cc.mean.xhat.grid.time(static_cast<int>(k)));
    for (int i = 0; i < n; ++i) out += "," + num(cc.mean.xhat[k](i));
    out += "\n";
  }
  return out;
}

json solve_summary(const CCResult& r, const std::string& law_hash) {
  return {{"condition_determinant", number(r.cc.condition37.determinant)},
          {"condition_holds", r.cc.condition37.holds},
          {"regularity_margin", number(r.cc.regularity_margin)},
          {"dual_route_gap", number(r.cc.dual_route_gap)},
          {"decoupling_residual", number(r.cc.decoupling_residual)},
          {"warnings", r.cc.warnings},
          {"law_hash", law_hash}};
}

// Writes law.json, mean_field.csv and summary.json; returns the law hash.
std::string write_solution(RunDir& run, const CCResult& r, int n, json extra = json::object()) {
  const std::string law = dump_law(r.law, r.cc.mean.xhat);
  const std::string hash = hex64(fnv1a64(law));
  run.write("law.json", law);
  run.write("mean_field.csv", mean_field_csv(r.cc, n));
  json summary = solve_summary(r, hash);
  summary.update(extra);
  run.write_json("summary.json", summary);
  run.manifest()["law_hash"] = hash;
  return hash;
}

std::string trajectories_csv(const SimResult& r, int thin) {
  std::string out = "path,t,agent" + vec_header("x", r.n) + vec_header("u", r.m) + "\n";
  const int steps = r.grid.steps();
  for (int path = 0; path < r.paths; ++path) {
    for (int k = 0; k <= steps; ++k) {
      if (k % thin != 0 && k != steps) continue;
      const std::string prefix = std::to_string(path) + "," + num(r.grid.time(k)) + ",";
      for (int i = 0; i < r.N; ++i) {
        out += prefix + std::to_string(i + 1);
        for (int j = 0; j < r.n; ++j) out += "," + num(r.states[path][k](j, i));
        for (int j = 0; j < r.m; ++j) out += "," + num(r.controls[path][k](j, i));
        out += "\n";
      }
    }
  }
  return out;
}

std::string average_csv(const SimResult& r, int thin) {
  std::string out = "path,t" + vec_header("xavg", r.n) + "\n";
  const int steps = r.grid.steps();
  for (int path = 0; path < r.paths; ++path) {
    for (int k = 0; k <= steps; ++k) {
      if (k % thin != 0 && k != steps) continue;
      out += std::to_string(path) + "," + num(r.grid.time(k));
      for (int j = 0; j < r.n; ++j) out += "," + num(r.average[path][k](j));
      out += "\n";
    }
  }
  return out;
}

constexpr int kCostColumns = 10;

std::string costs_csv(const SimResult& r) {
  const int shown = std::min(r.N, kCostColumns);
  std::string out = "path,J_soc";
  for (int i = 1; i <= shown; ++i) out += ",J_" + std::to_string(i);
  out += "\n";
  for (int path = 0; path < r.paths; ++path) {
    out += std::to_string(path) + "," + num(r.social_costs(path));
    for (int i = 0; i < shown; ++i) out += "," + num(r.agent_costs(path, i));
    out += "\n";
  }
  return out;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::string out = "N,replications,estimate,se,agent_estimate,agent_se\n";
  for (const auto& row : t.rows) {
    out += std::to_string(row.N) + "," + std::to_string(row.replications) + "," + num(row.estimate) + "," +
           num(row.se) + "," + num(row.agent_estimate) + "," + num(row.agent_se) + "\n";
  }
  return out;
}

json convergence_json(const ConvergenceTable& t) {
  return {{"slope", number(t.slope)},
          {"intercept", number(t.intercept)},
          {"verdicts", {{"slope_in_range", t.slope >= -1.25 && t.slope <= -0.75}}}};
}

std::string gap_csv(const std::vector<GapRow>& rows) {
  std::string out =
      "N,paths,decentralized,decentralized_se,centralized,centralized_se,gap,gap_se,stationarity_passed\n";
  for (const auto& r : rows) {
    out += std::to_string(r.N) + "," + std::to_string(r.paths) + "," + num(r.decentralized) + "," +
           num(r.decentralized_se) + "," + num(r.centralized) + "," + num(r.centralized_se) + "," + num(r.gap) + "," +
           num(r.gap_se) + "," + (r.stationarity_passed ? "1" : "0") + "\n";
  }
  return out;
}

json gap_verdicts(const std::vector<GapRow>& rows) {
  bool dominance = true, trend = true, stationary = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dominance = dominance && rows[i].gap >= -2.0 * rows[i].gap_se;
    stationary = stationary && rows[i].stationarity_passed;
    if (i > 0) {
      const double tol = 2.0 * std::hypot(rows[i].gap_se, rows[i - 1].gap_se);
      trend = trend && rows[i].gap <= rows[i - 1].gap + tol;
    }
  }
  return {{"oracle_dominance", dominance}, {"non_increasing", trend}, {"stationarity", stationary}};
}

LawArtifact load_law_dir(const std::string& dir, const ModelParams& p, std::string* hash) {
  const std::string text = read_file((fs::path(dir) / "law.json").string());
  *hash = hex64(fnv1a64(text));
  LawArtifact law = parse_law(text);
  require_grid(law.law.Theta1, p.grid, "cli", "law");
  if (law.law.Theta1[0].rows() != p.m || law.law.Theta1[0].cols() != p.n) {
    throw Error(ErrorKind::SchemaError, "cli", "law dimensions do not match the config");
  }
  return law;
}

void report_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::NotSymmetric:
    case ErrorKind::InvalidN:
    case ErrorKind::TooLarge:
    case ErrorKind::ParseError:
    case ErrorKind::SchemaError:
    case ErrorKind::GridMismatch:
    case ErrorKind::IoError:
    case ErrorKind::CouplingPresent:
    case ErrorKind::NotReducedCase:
    case ErrorKind::MissingTrajectories:
      return kExitInvalid;
    case ErrorKind::NonFinite:
    case ErrorKind::RegularityLost:
    case ErrorKind::BlowUp:
    case ErrorKind::StationarityFailed:
    case ErrorKind::NearSingular:
      return kExitNumerical;
  }
  return kExitNumerical;
}

void check_valid(const ModelParams& p) {
  const auto report = validate(p);
  if (report.empty()) return;
  std::string message;
  for (const auto& line : report) message += "\n  " + line;
  throw Error(ErrorKind::InvalidArgument, "validate", "configuration rejected:" + message);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field social optimal LQG control with multiplicative noise", "mflqg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MFLQG_VERSION);

  std::string config, out_dir, law_dir, dq_file, dg_file, n_list;
  int N = 0, paths = 1, reps = 200, thin = 1, steps = 1000;
  std::uint64_t seed = kDefaultSeed;
  std::optional<std::string> repro_list;

  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration for admissibility");
  validate_cmd->add_option("config", config, "Configuration JSON")->required();

  auto* convexity_cmd = app.add_subcommand("convexity", "Evaluate the convexity criteria");
  convexity_cmd->add_option("config", config, "Configuration JSON")->required();
  convexity_cmd->add_option("--dq", dq_file, "Shift for Q as a JSON matrix");
  convexity_cmd->add_option("--dg", dg_file, "Shift for G as a JSON matrix");

  auto* solve_cmd = app.add_subcommand("solve", "Solve for the decentralized law");
  solve_cmd->add_option("config", config, "Configuration JSON")->required();
  solve_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate N agents under a solved law");
  simulate_cmd->add_option("config", config, "Configuration JSON")->required();
  simulate_cmd->add_option("--law", law_dir, "Directory written by solve")->required();
  simulate_cmd->add_option("--N", N, "Number of agents")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--paths", paths, "Monte Carlo paths")->required()->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", seed, "Master seed")->required();
  simulate_cmd->add_option("--out", out_dir, "Output directory")->required();
  simulate_cmd->add_option("--thin", thin, "Keep every k-th node in trajectory output")->check(CLI::PositiveNumber);

  auto* converge_cmd = app.add_subcommand("converge", "Convergence of the state average to the mean field");
  converge_cmd->add_option("config", config, "Configuration JSON")->required();
  converge_cmd->add_option("--law", law_dir, "Directory written by solve")->required();
  converge_cmd->add_option("--N-list", n_list, "Comma separated agent counts")->required();
  converge_cmd->add_option("--reps", reps, "Replications per N")->required()->check(CLI::PositiveNumber);
  converge_cmd->add_option("--seed", seed, "Master seed")->required();
  converge_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* gap_cmd = app.add_subcommand("gap", "Decentralized versus centralized social cost");
  gap_cmd->add_option("config", config, "Configuration JSON")->required();
  gap_cmd->add_option("--N-list", n_list, "Comma separated agent counts")->required();
  gap_cmd->add_option("--paths", paths, "Monte Carlo paths")->required()->check(CLI::PositiveNumber);
  gap_cmd->add_option("--seed", seed, "Master seed")->required();
  gap_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* repro_cmd = app.add_subcommand("repro-sec7", "Solve, simulate and study the bundled two-dimensional example");
  repro_cmd->add_option("--out", out_dir, "Output directory")->required();
  repro_cmd->add_option("--steps", steps, "Grid steps")->check(CLI::PositiveNumber);
  repro_cmd->add_option("--N", N, "Agents in the trajectory run")->check(CLI::PositiveNumber);
  repro_cmd->add_option("--seed", seed, "Master seed");
  repro_cmd->add_option("--reps", reps, "Replications per N in the convergence study")->check(CLI::PositiveNumber);
  repro_cmd->add_option("--N-list", repro_list, "Agent counts for the convergence study");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*validate_cmd) {
      const LoadedConfig c = load(config);
      report_warnings(c.warnings, err);
      const auto report = validate(c.params);
      json j = {{"valid", report.empty()}, {"problems", report}, {"warnings", c.warnings}, {"config_hash", c.hash}};
      out << j.dump(2) << "\n";
      return report.empty() ? kExitOk : kExitInvalid;
    }

    if (*convexity_cmd) {
      const LoadedConfig c = load(config);
      report_warnings(c.warnings, err);
      check_valid(c.params);
      const int n = c.params.n;
      const Mat dQ = dq_file.empty() ? default_delta_Q(c.params) : parse_matrix_file(dq_file, n);
      const Mat dG = dg_file.empty() ? default_delta_G(c.params) : parse_matrix_file(dg_file, n);
      json j = convexity_json(c.params, dQ, dG);
      j["growth_constant"] = number(growth_constant(c.params));
      out << j.dump(2) << "\n";
      return kExitOk;
    }

    if (*solve_cmd) {
      const LoadedConfig c = load(config);
      report_warnings(c.warnings, err);
      check_valid(c.params);
      const CCResult r = solve_cc(c.params);
      report_warnings(r.cc.warnings, err);
      RunDir run("solve", out_dir, c);
      const std::string hash = write_solution(run, r, c.params.n);
      run.finish();
      out << "law " << hash << " written to " << out_dir << "\n";
      return kExitOk;
    }

    if (*simulate_cmd) {
      const LoadedConfig c = load(config);
      report_warnings(c.warnings, err);
      check_valid(c.params);
      std::string law_hash;
      const LawArtifact law = load_law_dir(law_dir, c.params, &law_hash);
      SimOptions o;
      o.paths = paths;
      o.store = StoreMode::Auto;
      o.reference = &law.xhat;
      const SimResult r = simulate_decentralized(c.params, law.law, N, NoiseBank(seed, c.params.grid.dt()), o);
      RunDir run("simulate", out_dir, c);
      run.manifest()["seed"] = seed;
      run.manifest()["N"] = N;
      run.manifest()["paths"] = paths;
      run.manifest()["law_hash"] = law_hash;
      run.manifest()["trajectories_stored"] = r.has_trajectories;
      if (r.has_trajectories) run.write("trajectories.csv", trajectories_csv(r, thin));
      run.write("average.csv", average_csv(r, thin));
      run.write("costs.csv", costs_csv(r));
      run.write_json("summary.json", {{"J_soc", number(r.mean_social_cost())},
                                      {"J_soc_se", number(r.social_cost_se())},
                                      {"sup_average_deviation", number(sample_mean(r.sup_average_deviation))},
                                      {"sup_agent_deviation", number(sample_mean(r.sup_agent_deviation))}});
      run.finish();
      out << "simulated " << paths << " path(s) of " << N << " agents into " << out_dir << "\n";
      return kExitOk;
    }

    if (*converge_cmd) {
      const LoadedConfig c = load(config);
      report_warnings(c.warnings, err);
      check_valid(c.params);
      const std::vector<int> Ns = parse_list(n_list);
      std::string law_hash;
      const LawArtifact law = load_law_dir(law_dir, c.params, &law_hash);
      const ConvergenceTable t = convergence_study(c.params, law.law, law.xhat, Ns, reps, seed);
      RunDir run("converge", out_dir, c);
      run.manifest()["seed"] = seed;
      run.manifest()["law_hash"] = law_hash;
      run.write("convergence.csv", convergence_csv(t));
      run.write_json("summary.json", convergence_json(t));
      run.finish();
      out << "slope " << num(t.slope) << "\n";
      return kExitOk;
    }

    if (*gap_cmd) {
      const LoadedConfig c = load(config);
      report_warnings(c.warnings, err);
      check_valid(c.params);
      const std::vector<int> Ns = parse_list(n_list);
      const json convexity =
          convexity_json(c.params, default_delta_Q(c.params), default_delta_G(c.params));
      std::vector<std::string> warnings;
      if (!convexity["uniformly_convex"].get<bool>()) {
        warnings.push_back("ConvexityUnverified: no criterion certifies uniform convexity");
      }
      report_warnings(warnings, err);
      const CCResult law = solve_cc(c.params);
      GapOptions o;
      o.stationarity.seed = seed;
      const auto rows = gap_study(c.params, law.law, Ns, paths, seed, o);
      RunDir run("gap", out_dir, c);
      run.manifest()["seed"] = seed;
      run.write("gap.csv", gap_csv(rows));
      run.write_json("summary.json", {{"verdicts", gap_verdicts(rows)}, {"warnings", warnings},
                                      {"convexity", convexity}});
      run.finish();
      out << "gap study over " << rows.size() << " value(s) of N written to " << out_dir << "\n";
      return kExitOk;
    }

    if (*repro_cmd) {
      const LoadedConfig c = builtin(steps);
      const ModelParams& p = c.params;
      const int agents = N > 0 ? N : 1000;
      const std::vector<int> Ns = repro_list ? parse_list(*repro_list) : std::vector<int>{50, 100, 200, 400, 800};
      const CCResult r = solve_cc(p);
      report_warnings(r.cc.warnings, err);
      SimOptions o;
      o.paths = 1;
      o.store = StoreMode::Never;
      o.reference = &r.cc.mean.xhat;
      const SimResult sim = simulate_decentralized(p, r.law, agents, NoiseBank(seed, p.grid.dt()), o);
      const ConvergenceTable t = convergence_study(p, r.law, r.cc.mean.xhat, Ns, reps, seed);

      RunDir run("repro-sec7", out_dir, c);
      run.manifest()["seed"] = seed;
      run.manifest()["N"] = agents;
      std::string traj = "t" + vec_header("xhat", p.n) + vec_header("xavg", p.n) + "\n";
      double sup = 0.0;
      for (int k = 0; k <= p.grid.steps(); ++k) {
        const Vec& xh = r.cc.mean.xhat[k];
        const Vec& xa = sim.average[0][k];
        sup = std::max(sup, (xa - xh).cwiseAbs().maxCoeff());
        traj += num(p.grid.time(k));
        for (int i = 0; i < p.n; ++i) traj += "," + num(xh(i));
        for (int i = 0; i < p.n; ++i) traj += "," + num(xa(i));
        traj += "\n";
      }
      run.write("trajectories.csv", traj);
      run.write("convergence.csv", convergence_csv(t));
      json extra = {{"sup_distance", number(sup)},
                    {"N", agents},
                    {"convergence", convergence_json(t)},
                    {"convexity", convexity_json(p, default_delta_Q(p), default_delta_G(p))}};
      write_solution(run, r, p.n, extra);
      run.finish();
      out << "sup distance " << num(sup) << ", slope " << num(t.slope) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInvalid;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace mflqg::cli
