#include <doctest.h>

#include <cmath>

#include "mflqg/ode.hpp"
#include "mflqg/oracle.hpp"
#include "mflqg/riccati.hpp"
#include "mflqg/simulator.hpp"
#include "random_model.hpp"

using namespace mflqg;

namespace {
VecTrajectory constant_vec(const TimeGrid& g, const Vec& v) { return VecTrajectory(g, std::vector<Vec>(g.size(), v)); }
}  // namespace

TEST_CASE("zero weights give a zero solution") {
  ModelParams p = builtin_example_params(200);
  p.Q = Coefficient(Mat(Mat::Zero(2, 2)));
  const PSolution s = solve_P(p, p.grid);
  CHECK(s.P.max_abs() == 0.0);
  CHECK(theta1(s.P, p).max_abs() == 0.0);
}

TEST_CASE("scalar linear Riccati closed form") {
  for (double a : {0.7, -0.4}) {
    ScalarModel m;
    m.A = a;
    m.Q = 1.3;
    m.G = 0.6;
    m.R = 1.0;
    const ModelParams p = make_scalar_model(m);
    const PSolution s = solve_P(p, p.grid);
    double worst = 0.0;
    for (int k = 0; k <= p.grid.steps(); ++k) {
      const double tau = p.grid.horizon() - p.grid.time(k);
      const double e = std::exp(2 * a * tau);
      worst = std::max(worst, std::abs(s.P[k](0, 0) - (e * m.G + m.Q * (e - 1) / (2 * a))));
    }
    CHECK(worst < 1e-7);
    CHECK(s.P.back()(0, 0) == m.G);
  }
}

TEST_CASE("benchmark instance is regular") {
  const ModelParams p = builtin_example_params();
  const PSolution s = solve_P(p, p.grid);
  CHECK(s.regularity_margin > 0.0);
  CHECK(s.P.back().cwiseAbs().maxCoeff() == 0.0);
  double asym = 0.0;
  for (const auto& P : s.P.values) asym = std::max(asym, asymmetry(P));
  CHECK(asym <= 1e-9);
}

TEST_CASE("residual decays at second order") {
  const ModelParams base = builtin_example_params();
  std::vector<double> res;
  for (int steps : {100, 200, 400}) {
    ModelParams p = base;
    p.grid = TimeGrid(1.0, steps);
    res.push_back(riccati_residual(p, solve_P(p, p.grid).P));
  }
  const double slope1 = std::log2(res[0] / res[1]);
  const double slope2 = std::log2(res[1] / res[2]);
  CHECK(slope1 == doctest::Approx(2.0).epsilon(0.15));
  CHECK(slope2 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("negative control weight loses regularity") {
  ScalarModel m;
  m.R = -1.0;
  m.B = 1.0;
  const ModelParams p = make_scalar_model(m);
  try {
    solve_P(p, p.grid);
    FAIL("expected RegularityLost");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RegularityLost);
  }
}

TEST_CASE("feedback gain arithmetic") {
  ScalarModel m;
  m.R = 1.0;
  m.D = 1.0;
  m.B = 1.0;
  const ModelParams p = make_scalar_model(m);
  CHECK(theta1_at(p.node(0), Mat::Ones(1, 1), 0.0)(0, 0) == doctest::Approx(-0.5));

  std::mt19937_64 rng(4);
  ModelParams q = testing::random_model(rng, 2, 2);
  q.B = Coefficient(Mat(Mat::Zero(2, 2)));
  q.D = Coefficient(Mat(Mat::Zero(2, 2)));
  CHECK(theta1_at(q.node(0), testing::random_psd(rng, 2), 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("larger terminal weight does not lower P") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    ModelParams p = testing::random_model(rng, 2, 2, 200);
    const PSolution a = solve_P(p, p.grid);
    p.G = p.G + 0.5 * Mat::Identity(2, 2);
    const PSolution b = solve_P(p, p.grid);
    for (int k = 0; k <= p.grid.steps(); ++k) CHECK(lambda_min(b.P[k]) >= lambda_min(a.P[k]) - 1e-10);
  }
}

TEST_CASE("affine adjoint") {
  const ModelParams p = builtin_example_params(200);
  const PSolution s = solve_P(p, p.grid);
  const VecTrajectory zero = constant_vec(p.grid, Vec::Zero(2));
  ModelParams q = p;
  q.eta = Coefficient(Mat(Mat::Zero(2, 1)));
  CHECK(solve_phi(s.P, q, zero, zero, zero, zero).max_abs() == 0.0);

  ModelParams r = p;
  r.G = Mat::Identity(2, 2);
  r.GammaBar = 0.5 * Mat::Identity(2, 2);
  r.etaBar = Vec::Ones(2);
  const PSolution sr = solve_P(r, r.grid);
  const VecTrajectory x = constant_vec(r.grid, Vec::Constant(2, 0.3));
  const VecTrajectory phi = solve_phi(sr.P, r, x, zero, zero, zero);
  const Mat I = Mat::Identity(2, 2);
  const Vec q2 = -r.G * (r.GammaBar * x.back() + r.etaBar) -
                 r.GammaBar.transpose() * r.G * ((I - r.GammaBar) * x.back() - r.etaBar);
  CHECK(phi.back() == q2);

  ScalarModel m;
  m.Ftilde = 1.0;
  const ModelParams sm = make_scalar_model(m);
  const PSolution ss = solve_P(sm, sm.grid);
  const VecTrajectory z1 = constant_vec(sm.grid, Vec::Zero(1));
  const VecTrajectory ones = constant_vec(sm.grid, Vec::Ones(1));
  const VecTrajectory ramp = solve_phi(ss.P, sm, z1, z1, z1, ones);
  for (int k = 0; k <= sm.grid.steps(); ++k) CHECK(std::abs(ramp[k](0) - (1.0 - sm.grid.time(k))) < 1e-12);

  const VecTrajectory other(TimeGrid(1.0, 10), std::vector<Vec>(11, Vec::Zero(1)));
  CHECK_THROWS_AS(solve_phi(ss.P, sm, other, z1, z1, z1), Error);
}

TEST_CASE("affine gain") {
  const ModelParams p = builtin_example_params(100);
  const PSolution s = solve_P(p, p.grid);
  const VecTrajectory zero = constant_vec(p.grid, Vec::Zero(2));
  CHECK(theta2(s.P, zero, zero, p).max_abs() == 0.0);

  ModelParams q = p;
  q.B = Coefficient(Mat(Mat::Zero(2, 2)));
  const PSolution sq = solve_P(q, q.grid);
  const VecTrajectory x = constant_vec(q.grid, Vec::Constant(2, 0.7));
  const VecTrajectory th = theta2(sq.P, zero, x, q);
  const auto c = q.node(0);
  const Mat inv = (c.R + c.D.transpose() * sq.P[3] * c.D).inverse();
  CHECK((th[3] - (-inv * c.D.transpose() * sq.P[3] * c.Ftilde * x[3])).cwiseAbs().maxCoeff() < 1e-12);

  ScalarModel m;
  m.B = 1.0;
  const ModelParams sm = make_scalar_model(m);
  const PSolution ss = solve_P(sm, sm.grid);
  const VecTrajectory two = constant_vec(sm.grid, Vec::Constant(1, 2.0));
  const VecTrajectory z1 = constant_vec(sm.grid, Vec::Zero(1));
  CHECK(theta2(ss.P, two, z1, sm)[0](0) == doctest::Approx(-2.0));
}

TEST_CASE("oracle collapses to the single-agent law") {
  std::mt19937_64 rng(12);
  ModelParams p = testing::random_model(rng, 2, 1, 200);
  p.F = Coefficient(Mat(Mat::Zero(2, 2)));
  p.Ftilde = Coefficient(Mat(Mat::Zero(2, 2)));
  p.Gamma = Coefficient(Mat(Mat::Zero(2, 2)));
  p.GammaBar = Mat::Zero(2, 2);
  p.eta = Coefficient(Mat(Mat::Zero(2, 1)));
  const OracleLaw o = integrate_oracle(p, 1, p.grid);
  const MatTrajectory th = theta1(solve_P(p, p.grid).P, p);
  CHECK(max_distance(o.Theta, th) < 1e-8);
}

TEST_CASE("oracle with zero weights") {
  ModelParams p = builtin_example_params(100);
  p.Q = Coefficient(Mat(Mat::Zero(2, 2)));
  p.eta = Coefficient(Mat(Mat::Zero(2, 1)));
  const OracleLaw o = integrate_oracle(p, 2, p.grid);
  CHECK(o.P.max_abs() == 0.0);
  CHECK(o.Theta.max_abs() == 0.0);
  CHECK(o.v.max_abs() == 0.0);
}

TEST_CASE("oracle is stationary and dominates perturbed controls") {
  std::mt19937_64 rng(31);
  const ModelParams p = testing::random_model(rng, 1, 1, 200);
  StationarityOptions opt;
  opt.paths = 128;
  StationarityReport report;
  const OracleLaw o = solve_oracle(p, 2, opt, &report);
  CHECK(report.passed);

  const NoiseBank noise(99, p.grid.dt());
  SimOptions sim;
  sim.paths = 200;
  sim.store = StoreMode::Never;
  const double best = simulate_centralized(p, o, noise, sim).mean_social_cost();
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    auto pert = [=](double t) {
      Vec out(2);
      out << a + b * t, c * std::sin(3.0 * t) + d;
      return out;
    };
    CHECK(simulate_centralized(p, o, noise, sim, pert).mean_social_cost() >= best);
  }
}

TEST_CASE("wrong affine term fails the stationarity test") {
  std::mt19937_64 rng(32);
  const ModelParams p = testing::random_model(rng, 1, 1, 200);
  OracleLaw o = integrate_oracle(p, 2, p.grid);
  for (auto& v : o.v.values) v = -v;
  StationarityOptions opt;
  opt.paths = 64;
  CHECK_FALSE(check_stationarity(p, o, opt).passed);
}
