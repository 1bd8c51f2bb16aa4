#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "mflqg/cli.hpp"
#include "mflqg/config_io.hpp"

namespace fs = std::filesystem;
using namespace mflqg;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mflqg_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const ModelParams& p) {
  const std::string path = (dir / "config.json").string();
  save_config(p, path);
  return path;
}

}  // namespace

TEST_CASE("validate accepts the bundled example") {
  const fs::path dir = scratch("validate");
  const Outcome o = invoke({"validate", write_config(dir, builtin_example_params(100))});
  CHECK(o.code == 0);
  CHECK(nlohmann::json::parse(o.out)["valid"] == true);
}

TEST_CASE("validate reports bad input with exit code 1") {
  const fs::path dir = scratch("invalid");
  write_file((dir / "broken.json").string(), "{ not json");
  Outcome o = invoke({"validate", (dir / "broken.json").string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("ParseError") != std::string::npos);

  o = invoke({"frobnicate"});
  CHECK(o.code == 1);
  o = invoke({"validate", (dir / "missing.json").string()});
  CHECK(o.code == 1);
}

TEST_CASE("negative control weight fails numerically") {
  const fs::path dir = scratch("regularity");
  ScalarModel s;
  s.B = 1.0;
  s.R = -1.0;
  s.steps = 50;
  const Outcome o = invoke({"solve", write_config(dir, make_scalar_model(s)), "--out", (dir / "out").string()});
  CHECK(o.code == 2);
  CHECK(o.err.find("RegularityLost") != std::string::npos);
  CHECK(o.err.find("solve_P") != std::string::npos);
}

TEST_CASE("convexity report") {
  const fs::path dir = scratch("convexity");
  const Outcome o = invoke({"convexity", write_config(dir, builtin_example_params(50))});
  REQUIRE(o.code == 0);
  const auto j = nlohmann::json::parse(o.out);
  CHECK(j.contains("psd"));
  CHECK(j.contains("coupled"));
  CHECK(j["decoupled"]["status"] == "NotApplicable");
}

TEST_CASE("solve, simulate and converge keep the law hash") {
  const fs::path dir = scratch("pipeline");
  const std::string config = write_config(dir, builtin_example_params(100));
  const std::string law = (dir / "law").string();
  REQUIRE(invoke({"solve", config, "--out", law}).code == 0);
  const auto solved = nlohmann::json::parse(read_file(law + "/manifest.json"));
  CHECK(solved["config_hash"] == hex64(fnv1a64(read_file(config))));
  CHECK(read_file(law + "/config.json") == read_file(config));

  const std::string sim = (dir / "sim").string();
  REQUIRE(invoke({"simulate", config, "--law", law, "--N", "5", "--paths", "2", "--seed", "3", "--out", sim,
                  "--thin", "10"})
              .code == 0);
  const auto simulated = nlohmann::json::parse(read_file(sim + "/manifest.json"));
  CHECK(simulated["law_hash"] == solved["law_hash"]);
  CHECK(simulated["seed"] == 3);
  const std::string traj = read_file(sim + "/trajectories.csv");
  CHECK(traj.rfind("path,t,agent,x_1,x_2,u_1,u_2\n", 0) == 0);
  CHECK(read_file(sim + "/costs.csv").rfind("path,J_soc,J_1,J_2,J_3,J_4,J_5\n", 0) == 0);

  const std::string conv = (dir / "conv").string();
  REQUIRE(invoke({"converge", config, "--law", law, "--N-list", "4,8", "--reps", "5", "--seed", "1", "--out", conv})
              .code == 0);
  CHECK(nlohmann::json::parse(read_file(conv + "/summary.json")).contains("slope"));
  CHECK(invoke({"converge", config, "--law", law, "--N-list", "4,x", "--reps", "5", "--seed", "1", "--out", conv})
            .code == 1);
}

TEST_CASE("simulation output does not depend on the thread count") {
  const fs::path dir = scratch("threads");
  const std::string config = write_config(dir, builtin_example_params(100));
  const std::string law = (dir / "law").string();
  REQUIRE(invoke({"solve", config, "--out", law}).code == 0);
  std::string outputs[2];
  const char* threads[2] = {"1", "4"};
  for (int i = 0; i < 2; ++i) {
    setenv("MFLQG_THREADS", threads[i], 1);
    const std::string out = (dir / (std::string("sim") + threads[i])).string();
    REQUIRE(invoke({"simulate", config, "--law", law, "--N", "6", "--paths", "8", "--seed", "5", "--out", out}).code ==
            0);
    outputs[i] = read_file(out + "/trajectories.csv") + read_file(out + "/costs.csv");
  }
  unsetenv("MFLQG_THREADS");
  CHECK(outputs[0] == outputs[1]);
}

TEST_CASE("bundled configuration validates") {
  const Outcome o = invoke({"validate", std::string(MFLQG_SOURCE_DIR) + "/configs/example_n2.json"});
  CHECK(o.code == 0);
  CHECK(parse_config(read_file(std::string(MFLQG_SOURCE_DIR) + "/configs/example_n2.json")) ==
        builtin_example_params());
}

TEST_CASE("reproduction run matches the pinned values") {
  const fs::path dir = scratch("repro");
  const Outcome o = invoke({"repro-sec7", "--reps", "2", "--N-list", "4,8", "--out", dir.string()});
  REQUIRE(o.code == 0);
  const std::string traj = read_file((dir / "trajectories.csv").string());
  CHECK(traj.rfind("t,xhat_1,xhat_2,xavg_1,xavg_2\n", 0) == 0);
  const auto summary = nlohmann::json::parse(read_file((dir / "summary.json").string()));
  CHECK(summary["sup_distance"].get<double>() == doctest::Approx(0.10523025682220644).epsilon(1e-10));
  CHECK(summary["condition_determinant"].get<double>() == doctest::Approx(0.061687056722976266).epsilon(1e-9));
  CHECK(summary["N"] == 1000);
}
