#include <doctest.h>

#include <cmath>

#include "mflqg/analysis.hpp"
#include "mflqg/cc_solver.hpp"
#include "mflqg/ode.hpp"
#include "random_model.hpp"

using namespace mflqg;

TEST_CASE("log-log fit") {
  const auto [slope, intercept] = loglog_fit({1, 2, 4, 8}, {3.0, 1.5, 0.75, 0.375});
  CHECK(slope == doctest::Approx(-1.0));
  CHECK(intercept == doctest::Approx(std::log(3.0)));
  CHECK_THROWS_AS(loglog_fit({1}, {1}), Error);
  CHECK_THROWS_AS(loglog_fit({1, 2}, {1, 0}), Error);
}

TEST_CASE("noiseless state average matches the mean field up to the time step") {
  ModelParams p = builtin_example_params(400);
  p.C = Coefficient(Mat(Mat::Zero(2, 2)));
  p.D = Coefficient(Mat(Mat::Zero(2, 2)));
  p.Ftilde = Coefficient(Mat(Mat::Zero(2, 2)));
  const CCResult r = solve_cc(p);
  const ConvergenceTable t = convergence_study(p, r.law, r.cc.mean.xhat, {1, 4, 16}, 3, 5);
  for (const auto& row : t.rows) {
    CHECK(row.estimate == doctest::Approx(t.rows.front().estimate).epsilon(1e-12));
    CHECK(row.se == 0.0);
    CHECK(row.agent_estimate == doctest::Approx(row.estimate));
  }

  // What remains is the squared Euler error, so halving the step quarters it.
  ModelParams fine = p;
  fine.grid = TimeGrid(1.0, 800);
  const CCResult rf = solve_cc(fine);
  const double coarse = t.rows.front().estimate;
  const double refined = convergence_study(fine, rf.law, rf.cc.mean.xhat, {4}, 1, 5).rows.front().estimate;
  CHECK(std::log2(coarse / refined) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(refined < 1e-3);
}

TEST_CASE("convergence slope is insensitive to the tracking offset") {
  const ModelParams p = builtin_example_params(100);
  ModelParams scaled = p;
  scaled.eta = Coefficient(Mat(3.0 * p.eta.node(0)));
  const std::vector<int> Ns = {20, 40, 80, 160};
  const CCResult a = solve_cc(p);
  const CCResult b = solve_cc(scaled);
  const ConvergenceTable ta = convergence_study(p, a.law, a.cc.mean.xhat, Ns, 100, 77);
  const ConvergenceTable tb = convergence_study(scaled, b.law, b.cc.mean.xhat, Ns, 100, 77);
  CHECK(ta.rows.size() == 4);
  CHECK(ta.slope < 0.0);
  CHECK(std::abs(ta.slope - tb.slope) < 0.15);
}

TEST_CASE("convergence study is reproducible") {
  const ModelParams p = builtin_example_params(50);
  const CCResult r = solve_cc(p);
  StudyOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const ConvergenceTable a = convergence_study(p, r.law, r.cc.mean.xhat, {5, 10}, 20, 3, one);
  const ConvergenceTable b = convergence_study(p, r.law, r.cc.mean.xhat, {5, 10}, 20, 3, four);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].estimate == b.rows[i].estimate);
    CHECK(a.rows[i].se == b.rows[i].se);
  }
  CHECK(a.slope == b.slope);
}

TEST_CASE("lambda pair on trivial data") {
  ModelParams p = builtin_example_params(100);
  for (Coefficient* c : {&p.A, &p.C, &p.F, &p.Ftilde, &p.Q}) *c = Coefficient(Mat(Mat::Zero(2, 2)));
  p.B = Coefficient(Mat(Mat::Zero(2, 2)));
  p.D = Coefficient(Mat(Mat::Zero(2, 2)));
  p.G = Mat::Zero(2, 2);
  const LambdaStudy s = lambda_boundedness(p, solve_P(p, p.grid).P, {1, 10});
  for (const auto& pair : s.pairs) {
    CHECK(pair.Lambda1.max_abs() == 0.0);
    CHECK(pair.Lambda2.max_abs() == 0.0);
  }
  CHECK(s.bounded);
}

TEST_CASE("lambda pair without coupling reduces to a Lyapunov equation") {
  std::mt19937_64 rng(31);
  ModelParams p = testing::random_model(rng, 2, 2, 200);
  p.F = Coefficient(Mat(Mat::Zero(2, 2)));
  p.Ftilde = Coefficient(Mat(Mat::Zero(2, 2)));
  const MatTrajectory P = solve_P(p, p.grid).P;
  const LambdaStudy s = lambda_boundedness(p, P, {3, 50});
  const MatTrajectory Th = theta1(P, p);
  auto rhs = [&](double t, const Mat& L) -> Mat {
    const auto c = p.at(t);
    const Mat th = Th.at(t);
    return -(L * (c.A + c.B * th) + c.A.transpose() * L - c.C.transpose() * L * (c.C + c.D * th) + c.Q);
  };
  const MatTrajectory lyap = integrate_ode<Mat>(rhs, p.G, p.grid, Direction::Backward);
  for (const auto& pair : s.pairs) {
    CHECK(pair.Lambda2.max_abs() == 0.0);
    CHECK(max_distance(pair.Lambda1, lyap) < 1e-9);
    CHECK(pair.Lambda1.back() == p.G);
  }
}

TEST_CASE("lambda pair terminal values and bounds") {
  const ModelParams p = builtin_example_params(200);
  const LambdaStudy s = lambda_boundedness(p, solve_P(p, p.grid).P, {10, 100});
  CHECK(s.L > 0.0);
  CHECK(s.bound1.back() == p.G.cwiseAbs());
  CHECK(s.bound2.back().cwiseAbs().maxCoeff() == 0.0);
  for (const auto& pair : s.pairs) {
    CHECK(pair.Lambda1.back() == p.G);
    CHECK(pair.Lambda2.back().cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(lambda_boundedness(p, solve_P(p, p.grid).P, {0}), Error);
}

TEST_CASE("gap vanishes for a single uncoupled agent") {
  std::mt19937_64 rng(32);
  ModelParams p = testing::random_model(rng, 1, 1, 100);
  p.F = Coefficient(Mat(Mat::Zero(1, 1)));
  p.Ftilde = Coefficient(Mat(Mat::Zero(1, 1)));
  p.Gamma = Coefficient(Mat(Mat::Zero(1, 1)));
  p.GammaBar = Mat::Zero(1, 1);
  const CCResult r = solve_cc(p);
  GapOptions o;
  const auto rows = gap_study(p, r.law, {1}, 200, 9, o);
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(rows[0].gap) <= 2.0 * rows[0].gap_se + 1e-9);
  CHECK(std::abs(rows[0].gap) < 1e-8);
  CHECK(rows[0].stationarity_passed);
}

TEST_CASE("gap study is reproducible and favours the oracle") {
  std::mt19937_64 rng(33);
  const ModelParams p = testing::random_model(rng, 1, 1, 100);
  const CCResult r = solve_cc(p);
  GapOptions o;
  const auto a = gap_study(p, r.law, {2, 3}, 200, 4, o);
  o.threads = 1;
  const auto b = gap_study(p, r.law, {2, 3}, 200, 4, o);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].gap == b[i].gap);
    CHECK(a[i].gap_se == b[i].gap_se);
    CHECK(a[i].decentralized == b[i].decentralized);
    CHECK(a[i].gap >= -2.0 * a[i].gap_se);
  }
}
