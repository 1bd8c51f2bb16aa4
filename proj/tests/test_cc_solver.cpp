#include <doctest.h>

#include <cmath>

#include "mflqg/cc_solver.hpp"
#include "mflqg/ode.hpp"
#include "random_model.hpp"

using namespace mflqg;

namespace {

ModelParams zeroed(ModelParams p) {
  const Mat Z = Mat::Zero(p.n, p.n);
  for (Coefficient* c : {&p.A, &p.C, &p.F, &p.Ftilde, &p.Q}) *c = Coefficient(Z);
  p.B = Coefficient(Mat(Mat::Zero(p.n, p.m)));
  p.D = Coefficient(Mat(Mat::Zero(p.n, p.m)));
  p.G = Z;
  return p;
}

ModelParams reduced(ModelParams p) {
  p.C = Coefficient(Mat(Mat::Zero(p.n, p.n)));
  p.Ftilde = Coefficient(Mat(Mat::Zero(p.n, p.n)));
  return p;
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("closed-loop blocks without a control channel") {
  std::mt19937_64 rng(1);
  ModelParams p = testing::random_model(rng, 2, 2, 50);
  p.B = Coefficient(Mat(Mat::Zero(2, 2)));
  p.D = Coefficient(Mat(Mat::Zero(2, 2)));
  const CCMatrices cc = build_cc(p, solve_P(p, p.grid).P);
  for (const auto& b : cc.nodes) {
    CHECK(b.Pi1 == p.A.node(0));
    CHECK(max_abs(b.Pi3) == 0.0);
    CHECK(max_abs(b.Pi3p) == 0.0);
  }
}

TEST_CASE("mean-field coupling blocks vanish without coupling") {
  std::mt19937_64 rng(2);
  ModelParams p = testing::random_model(rng, 2, 2, 50);
  p.F = Coefficient(Mat(Mat::Zero(2, 2)));
  p.Ftilde = Coefficient(Mat(Mat::Zero(2, 2)));
  const CCMatrices cc = build_cc(p, solve_P(p, p.grid).P);
  for (const auto& b : cc.nodes) {
    CHECK(max_abs(b.Pi2) == 0.0);
    CHECK(max_abs(b.Pi2p) == 0.0);
    CHECK(max_abs(b.C2bar) == 0.0);
  }
}

TEST_CASE("scalar block assembly by hand") {
  ScalarModel s;
  s.A = 0.3; s.B = 0.8; s.C = 0.4; s.D = 0.5; s.F = 0.2; s.Ftilde = 0.6;
  s.Q = 1.1; s.R = 0.9; s.G = 0.7; s.Gamma = 0.35; s.GammaBar = 0.25;
  s.eta = 0.45; s.etaBar = -0.3; s.xi0 = 0.2;
  s.steps = 50;
  const ModelParams p = make_scalar_model(s);
  const double P = 0.83;
  const CCBlocks b = cc_blocks_at(p, Mat::Constant(1, 1, P), 0.0);

  const double sigma = s.R + s.D * P * s.D;
  const double th = -(s.B * P + s.D * P * s.C) / sigma;
  const double pi1 = s.A + s.B * th;
  const double pi1p = s.C + s.D * th;
  const double pi2 = s.F - s.B * s.D * P * s.Ftilde / sigma;
  const double pi2p = s.Ftilde - s.D * s.D * P * s.Ftilde / sigma;
  const double pi3 = -s.B * s.B / sigma;
  const double pi3p = -s.D * s.B / sigma;
  const double pi4 = (P * s.B + s.C * P * s.D) * s.D * P * s.Ftilde / sigma - s.C * P * s.Ftilde - P * s.F +
                     s.Q * s.Gamma + s.Gamma * s.Q * (1 - s.Gamma);
  CHECK(b.Pi1(0, 0) == doctest::Approx(pi1));
  CHECK(b.Pi1p(0, 0) == doctest::Approx(pi1p));
  CHECK(b.Pi2(0, 0) == doctest::Approx(pi2));
  CHECK(b.Pi2p(0, 0) == doctest::Approx(pi2p));
  CHECK(b.Pi3(0, 0) == doctest::Approx(pi3));
  CHECK(b.Pi3p(0, 0) == doctest::Approx(pi3p));
  CHECK(b.Pi4(0, 0) == doctest::Approx(pi4));

  Mat A2(3, 3), A2bar(3, 3), B2(3, 3), B2bar(3, 3), C2(3, 3), C2bar(3, 3), Gbar(3, 3), Gbarp(3, 3);
  A2 << 0, 0, 0, -s.Q, 0, 0, 0, 0, 0;
  A2bar << pi4, 0, 0, s.Q * s.Gamma, 0, 0, s.Gamma * s.Q * (1 - s.Gamma), 0, 0;
  B2 << -pi1, 0, -s.F, 0, -s.A, 0, 0, 0, -(s.A + s.F);
  B2bar << 0, -s.F, 0, 0, 0, 0, 0, -s.F, 0;
  C2 << 0, 0, 0, 0, -s.C, 0, 0, 0, 0;
  C2bar << 0, -s.Ftilde, 0, 0, 0, 0, 0, -s.Ftilde, 0;
  Gbar << 0, 0, 0, s.G, 0, 0, 0, 0, 0;
  Gbarp << -s.G * s.GammaBar - s.GammaBar * s.G * (1 - s.GammaBar), 0, 0, -s.G * s.GammaBar, 0, 0,
      -s.GammaBar * s.G * (1 - s.GammaBar), 0, 0;
  Vec f(3), g(3);
  f << s.Q * s.eta - s.Gamma * s.Q * s.eta, s.Q * s.eta, -s.Gamma * s.Q * s.eta;
  g << s.GammaBar * s.G * s.etaBar - s.G * s.etaBar, -s.G * s.etaBar, s.GammaBar * s.G * s.etaBar;
  CHECK(max_abs(b.A2 - A2) < 1e-14);
  CHECK(max_abs(b.A2bar - A2bar) < 1e-14);
  CHECK(max_abs(b.B2 - B2) < 1e-14);
  CHECK(max_abs(b.B2bar - B2bar) < 1e-14);
  CHECK(max_abs(b.C2 - C2) < 1e-14);
  CHECK(max_abs(b.C2bar - C2bar) < 1e-14);
  CHECK(max_abs(b.Gbar - Gbar) < 1e-14);
  CHECK(max_abs(b.Gbarp - Gbarp) < 1e-14);
  CHECK(max_abs(b.f - f) < 1e-14);
  CHECK(max_abs(b.g - g) < 1e-14);

  auto compose = [](const Mat& a, const Mat& bb, const Mat& c, const Mat& d) {
    Mat out(6, 6);
    out << a, bb, c, d;
    return out;
  };
  const Mat Z = Mat::Zero(3, 3);
  CHECK(b.At1 == compose(b.A1 + b.A1bar, Z, Z, b.A1));
  CHECK(b.Bt1 == compose(b.B1, Z, Z, b.B1));
  CHECK(b.At1p == compose(Z, Z, b.A1p + b.A1pbar, b.A1p));
  CHECK(b.Bt1p == compose(Z, Z, b.B1p, b.B1p));
  CHECK(b.At2 == compose(b.A2 + b.A2bar, Z, Z, b.A2));
  CHECK(b.Bt2 == compose(b.B2 + b.B2bar, Z, Z, b.B2));
  CHECK(b.Ct2 == compose(Z, Z, Z, b.C2));
  CHECK(b.Ct2bar == compose(Z, b.C2 + b.C2bar, Z, -b.C2));
  CHECK(b.Gt == compose(b.Gbar + b.Gbarp, Z, Z, b.Gbar));
  CHECK(b.ft.head(3) == b.f);
  CHECK(max_abs(b.ft.tail(3)) == 0.0);
  CHECK(b.xit0(0) == s.xi0);
}

TEST_CASE("no forcing gives a zero decoupling field") {
  std::mt19937_64 rng(3);
  ModelParams p = testing::random_model(rng, 2, 2, 100);
  p.Q = Coefficient(Mat(Mat::Zero(2, 2)));
  p.G = Mat::Zero(2, 2);
  const CCMatrices cc = build_cc(p, solve_P(p, p.grid).P);
  CHECK(solve_K(cc, p.grid).max_abs() == 0.0);
  p.eta = Coefficient(Mat(Mat::Zero(2, 1)));
  p.etaBar = Vec::Zero(2);
  const CCMatrices cc2 = build_cc(p, solve_P(p, p.grid).P);
  const MatTrajectory K = solve_K(cc2, p.grid);
  CHECK(solve_kappa(cc2, K, p.grid).max_abs() == 0.0);
}

TEST_CASE("explicit reduced solution agrees with the integrated one") {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const ModelParams p = reduced(testing::random_model(rng, 2, 2, 400));
    const CCMatrices cc = build_cc(p, solve_P(p, p.grid).P);
    const MatTrajectory K = solve_K(cc, p.grid);
    const MatTrajectory Kx = explicit_K_reduced(cc, p.grid);
    CHECK(max_distance(K, Kx) < 1e-5);
    CHECK(max_distance(K, solve_K(cc, p.grid, DecouplingForm::ExpectationMatched)) < 1e-12);
    ++checked;
  }
  CHECK(checked == 5);

  const ModelParams full = testing::random_model(rng, 2, 2, 50);
  const CCMatrices cc = build_cc(full, solve_P(full, full.grid).P);
  CHECK_THROWS_AS(explicit_K_reduced(cc, full.grid), Error);
}

TEST_CASE("decoupling residual decays at second order") {
  std::vector<double> res;
  for (int steps : {100, 200, 400}) {
    const ModelParams p = builtin_example_params(steps);
    const CCMatrices cc = build_cc(p, solve_P(p, p.grid).P);
    res.push_back(decoupling_residual(cc, solve_K(cc, p.grid), DecouplingForm::Pathwise));
  }
  CHECK(std::log2(res[0] / res[1]) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(std::log2(res[1] / res[2]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("kappa with a constant forcing and zero bracket") {
  ScalarModel s;
  s.Q = 1.5;
  s.Gamma = 0.4;
  s.eta = 0.8;
  s.G = 0.5;
  s.GammaBar = 0.2;
  s.etaBar = 0.3;
  const ModelParams p = make_scalar_model(s);
  const CCMatrices cc = build_cc(p, solve_P(p, p.grid).P);
  const MatTrajectory K = solve_K(cc, p.grid);
  const VecTrajectory kappa = solve_kappa(cc, K, p.grid);
  const Vec& ft = cc.nodes.front().ft;
  const Vec& gt = cc.nodes.front().gt;
  CHECK(kappa.back() == gt);
  for (int k = 0; k <= p.grid.steps(); ++k) {
    const double tau = p.grid.horizon() - p.grid.time(k);
    CHECK(max_abs(kappa[k] - (gt - ft * tau)) < 1e-12);
  }
}

TEST_CASE("solvability determinant on trivial blocks") {
  ModelParams p = zeroed(builtin_example_params(100));
  CCMatrices cc = build_cc(p, solve_P(p, p.grid).P);
  Condition37 c = check_condition_37(cc, p.grid);
  CHECK(c.determinant == doctest::Approx(1.0));
  CHECK(c.holds);

  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 0.4;
  A(1, 1) = -0.9;
  p.A = Coefficient(A);
  cc = build_cc(p, solve_P(p, p.grid).P);
  c = check_condition_37(cc, p.grid);
  CHECK(c.determinant == doctest::Approx(std::exp(-3.0 * A.trace())).epsilon(1e-9));
}

TEST_CASE("mean fields vanish without data") {
  ModelParams p = builtin_example_params(200);
  p.xi0 = Vec::Zero(2);
  p.eta = Coefficient(Mat(Mat::Zero(2, 1)));
  const CCResult r = solve_cc(p);
  CHECK(r.cc.mean.xhat.max_abs() == 0.0);
  CHECK(r.cc.mean.y1hat.max_abs() == 0.0);
  CHECK(r.cc.mean.beta1hat.max_abs() == 0.0);
  CHECK(r.law.Theta2.max_abs() == 0.0);
}

TEST_CASE("benchmark pipeline") {
  const ModelParams p = builtin_example_params();
  const CCResult r = solve_cc(p);
  const CCMatrices cc = build_cc(p, r.law.P);
  const int n = 2, N3 = 6;
  CHECK(r.cc.K.back() == cc.nodes.back().Gt);
  CHECK(r.cc.kappa.back() == cc.nodes.back().gt);
  CHECK(r.cc.mean.xhat.front() == p.xi0);
  CHECK(r.cc.dual_route_gap < 1e-5);
  CHECK(r.cc.condition37.holds);
  CHECK(r.cc.condition37.determinant == doctest::Approx(0.061687056722976266).epsilon(1e-9));

  const CCBlocks& bT = cc.nodes.back();
  const Vec Y1T = (bT.Gbar + bT.Gbarp) * r.cc.mean.X1.back() + bT.g;
  CHECK(max_abs(r.cc.mean.Y1.back() - Y1T) < 1e-8);

  double off = 0.0, kappa2 = 0.0;
  for (int k = 0; k <= p.grid.steps(); ++k) {
    off = std::max(off, max_abs(r.cc.K[k].topRightCorner(N3, N3)));
    off = std::max(off, max_abs(r.cc.K[k].bottomLeftCorner(N3, N3)));
    kappa2 = std::max(kappa2, max_abs(r.cc.kappa[k].tail(N3)));
  }
  CHECK(off < 1e-12);
  CHECK(kappa2 < 1e-12);

  // The (y1, x) block of the fluctuation gain solves the agent-level Lyapunov equation.
  auto rhs = [&](double t, const Mat& L) -> Mat {
    const CCBlocks b = cc.at(t);
    const auto s = p.at(t);
    return -(s.Q + s.A.transpose() * L + L * b.Pi1 + s.C.transpose() * L * b.Pi1p);
  };
  const MatTrajectory Lambda = integrate_ode<Mat>(rhs, p.G, p.grid, Direction::Backward);
  double gap = 0.0, beta_gap = 0.0;
  for (int k = 0; k <= p.grid.steps(); ++k) {
    gap = std::max(gap, max_abs(r.cc.K[k].block(N3 + n, N3, n, n) - Lambda[k]));
    const CCBlocks& b = cc.nodes[k];
    const Vec& x = r.cc.mean.xhat[k];
    const Vec expected = Lambda[k] * (b.Pi1p * x + b.Pi2p * x + b.Pi3p * r.cc.mean.phi[k]);
    beta_gap = std::max(beta_gap, max_abs(r.cc.mean.beta1hat[k] - expected));
  }
  CHECK(gap < 1e-8);
  CHECK(beta_gap < 1e-8);
}

TEST_CASE("random instances pass the dual-route check") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    const ModelParams p = testing::random_model(rng, 2, 1, 400);
    const CCResult r = solve_cc(p);
    CHECK(r.cc.dual_route_gap < 1e-5);
  }
}

TEST_CASE("pipeline errors carry their stage") {
  ScalarModel s;
  s.R = -1.0;
  s.B = 1.0;
  try {
    solve_cc(make_scalar_model(s));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RegularityLost);
    CHECK(e.stage().rfind("solve_cc/solve_P", 0) == 0);
  }
}
