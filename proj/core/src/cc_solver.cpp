#include "mflqg/cc_solver.hpp"

#include <cmath>

#include "mflqg/ode.hpp"

namespace mflqg {

namespace {

Mat zeros(int r, int c) { return Mat::Zero(r, c); }

void put(Mat& m, int i, int j, int n, const Mat& block) { m.block(i * n, j * n, n, n) = block; }

Mat stack2(const Mat& a11, const Mat& a12, const Mat& a21, const Mat& a22) {
  const auto r = a11.rows(), c = a11.cols();
  Mat out(2 * r, 2 * c);
  out << a11, a12, a21, a22;
  return out;
}

[[noreturn]] void rethrow_blowup(const char* stage, const Error& e) {
  if (e.kind() == ErrorKind::NonFinite) throw Error(ErrorKind::BlowUp, stage, e.what());
  throw e;
}

}  // namespace

CCBlocks cc_blocks_at(const ModelParams& params, const Mat& P, double t) {
  const int n = params.n;
  const auto s = params.at(t);
  const Mat I = Mat::Identity(n, n);
  const Mat& G = params.G;
  const Mat& Gb = params.GammaBar;

  const Mat inv = regular_inverse(s.R + s.D.transpose() * P * s.D, "build_cc", t);
  const Mat L = P * s.B + s.C.transpose() * P * s.D;
  const Mat th = -inv * L.transpose();
  const Mat PFt = P * s.Ftilde;

  CCBlocks b;
  b.Pi1 = s.A + s.B * th;
  b.Pi2 = s.F - s.B * inv * s.D.transpose() * PFt;
  b.Pi3 = -s.B * inv * s.B.transpose();
  b.Pi1p = s.C + s.D * th;
  b.Pi2p = s.Ftilde - s.D * inv * s.D.transpose() * PFt;
  b.Pi3p = -s.D * inv * s.B.transpose();
  b.Pi4 = L * inv * s.D.transpose() * PFt - s.C.transpose() * PFt - P * s.F + s.Q * s.Gamma +
          s.Gamma.transpose() * s.Q * (I - s.Gamma);

  const int N3 = 3 * n;
  auto diag_first = [&](const Mat& block) {
    Mat m = zeros(N3, N3);
    put(m, 0, 0, n, block);
    return m;
  };
  b.A1 = diag_first(b.Pi1);
  b.A1bar = diag_first(b.Pi2);
  b.B1 = diag_first(b.Pi3);
  b.A1p = diag_first(b.Pi1p);
  b.A1pbar = diag_first(b.Pi2p);
  b.B1p = diag_first(b.Pi3p);

  b.A2 = zeros(N3, N3);
  put(b.A2, 1, 0, n, -s.Q);

  b.A2bar = zeros(N3, N3);
  put(b.A2bar, 0, 0, n, b.Pi4);
  put(b.A2bar, 1, 0, n, s.Q * s.Gamma);
  put(b.A2bar, 2, 0, n, s.Gamma.transpose() * s.Q * (I - s.Gamma));

  b.B2 = zeros(N3, N3);
  put(b.B2, 0, 0, n, -b.Pi1.transpose());
  put(b.B2, 0, 2, n, -s.F.transpose());
  put(b.B2, 1, 1, n, -s.A.transpose());
  put(b.B2, 2, 2, n, -(s.A + s.F).transpose());

  b.B2bar = zeros(N3, N3);
  put(b.B2bar, 0, 1, n, -s.F.transpose());
  put(b.B2bar, 2, 1, n, -s.F.transpose());

  b.C2 = zeros(N3, N3);
  put(b.C2, 1, 1, n, -s.C.transpose());

  b.C2bar = zeros(N3, N3);
  put(b.C2bar, 0, 1, n, -s.Ftilde.transpose());
  put(b.C2bar, 2, 1, n, -s.Ftilde.transpose());

  const Vec Qeta = s.Q * s.eta;
  const Vec GQeta = s.Gamma.transpose() * Qeta;
  b.f = Vec::Zero(N3);
  b.f << Qeta - GQeta, Qeta, -GQeta;

  b.Gbar = zeros(N3, N3);
  put(b.Gbar, 1, 0, n, G);
  b.Gbarp = zeros(N3, N3);
  put(b.Gbarp, 0, 0, n, -G * Gb - Gb.transpose() * G * (I - Gb));
  put(b.Gbarp, 1, 0, n, -G * Gb);
  put(b.Gbarp, 2, 0, n, -Gb.transpose() * G * (I - Gb));
  const Vec Geta = G * params.etaBar;
  const Vec GbGeta = Gb.transpose() * Geta;
  b.g = Vec::Zero(N3);
  b.g << GbGeta - Geta, -Geta, GbGeta;

  const Mat Z3 = zeros(N3, N3);
  b.At1 = stack2(b.A1 + b.A1bar, Z3, Z3, b.A1);
  b.Bt1 = stack2(b.B1, Z3, Z3, b.B1);
  b.At1p = stack2(Z3, Z3, b.A1p + b.A1pbar, b.A1p);
  b.Bt1p = stack2(Z3, Z3, b.B1p, b.B1p);
  b.At2 = stack2(b.A2 + b.A2bar, Z3, Z3, b.A2);
  b.Bt2 = stack2(b.B2 + b.B2bar, Z3, Z3, b.B2);
  b.Ct2 = stack2(Z3, Z3, Z3, b.C2);
  b.Ct2bar = stack2(Z3, b.C2 + b.C2bar, Z3, -b.C2);
  b.Gt = stack2(b.Gbar + b.Gbarp, Z3, Z3, b.Gbar);
  b.ft = Vec::Zero(2 * N3);
  b.ft.head(N3) = b.f;
  b.gt = Vec::Zero(2 * N3);
  b.gt.head(N3) = b.g;
  b.xit0 = Vec::Zero(2 * N3);
  b.xit0.head(n) = params.xi0;
  return b;
}

CCBlocks CCMatrices::at(double t) const { return cc_blocks_at(params, P.at(t), t); }

CCMatrices build_cc(const ModelParams& params, const MatTrajectory& P) {
  CCMatrices cc{params, P, {}};
  cc.nodes.reserve(P.size());
  for (int k = 0; k <= P.grid.steps(); ++k) {
    const double t = P.grid.time(k);
    cc.nodes.push_back(cc_blocks_at(params, P[k], t));
    const CCBlocks& b = cc.nodes.back();
    const auto s = params.at(t);
    const Mat th = theta1_at(s, P[k], t);
    const double gap = std::max(detail::max_abs(Mat(b.Pi1 - (s.A + s.B * th))),
                                detail::max_abs(Mat(b.Pi1p - (s.C + s.D * th))));
    if (gap > 1e-10 * (1.0 + detail::max_abs(P[k]))) {
      throw Error(ErrorKind::RegularityLost, "build_cc", "Pi1/Pi1' disagree with Theta1 by " + std::to_string(gap));
    }
  }
  return cc;
}

Mat decoupling_rhs(const CCBlocks& b, const Mat& K, DecouplingForm form) {
  const Mat diffusion = K * (b.At1p + b.Bt1p * K);
  Mat out = b.At2 + b.Bt2 * K - K * (b.At1 + b.Bt1 * K);
  if (form == DecouplingForm::ExpectationMatched) {
    out += (b.Ct2 + b.Ct2bar) * diffusion;
    return out;
  }
  out += b.Ct2 * diffusion;
  const auto half = b.At1.rows() / 2;
  out.leftCols(half) += b.Ct2bar * diffusion.leftCols(half);
  return out;
}

MatTrajectory solve_K(const CCMatrices& cc, const TimeGrid& grid, DecouplingForm form) {
  auto rhs = [&](double t, const Mat& K) { return decoupling_rhs(cc.at(t), K, form); };
  try {
    return integrate_ode<Mat>(rhs, cc.nodes.back().Gt, grid, Direction::Backward);
  } catch (const Error& e) {
    rethrow_blowup("solve_K", e);
  }
}

VecTrajectory solve_kappa(const CCMatrices& cc, const MatTrajectory& K, const TimeGrid& grid) {
  require_grid(K, grid, "solve_kappa", "K");
  auto rhs = [&](double t, const Vec& kappa) -> Vec {
    const CCBlocks b = cc.at(t);
    const Mat Kt = K.at(t);
    return (b.Bt2 + (b.Ct2 + b.Ct2bar) * Kt * b.Bt1p - Kt * b.Bt1) * kappa + b.ft;
  };
  try {
    return integrate_ode<Vec>(rhs, cc.nodes.back().gt, grid, Direction::Backward);
  } catch (const Error& e) {
    rethrow_blowup("solve_kappa", e);
  }
}

Condition37 check_condition_37(const CCMatrices& cc, const TimeGrid& grid) {
  const int N3 = 3 * cc.n();
  auto rhs = [&](double t, const Mat& Phi) -> Mat {
    const CCBlocks b = cc.at(t);
    Mat M(2 * N3, 2 * N3);
    M << b.A1, b.B1, b.A2 - b.Gbar * b.A1 + (b.B2 - b.Gbar * b.B1) * b.Gbar, b.B2 - b.Gbar * b.B1;
    return M * Phi;
  };
  MatTrajectory Phi;
  try {
    Phi = integrate_ode<Mat>(rhs, Mat(Mat::Identity(2 * N3, 2 * N3)), grid, Direction::Forward);
  } catch (const Error& e) {
    rethrow_blowup("check_condition_37", e);
  }
  Condition37 out;
  out.determinant = Phi.back().bottomRightCorner(N3, N3).determinant();
  out.holds = std::abs(out.determinant) > kSingularTol;
  return out;
}

MatTrajectory explicit_K_reduced(const CCMatrices& cc, const TimeGrid& grid) {
  const int n = cc.n();
  const int N6 = 6 * n;
  for (int k = 0; k <= cc.params.grid.steps(); ++k) {
    const auto s = cc.params.node(k);
    if (detail::max_abs(s.C) != 0.0 || detail::max_abs(s.Ftilde) != 0.0) {
      throw Error(ErrorKind::NotReducedCase, "explicit_K_reduced", "requires C = 0 and Ftilde = 0");
    }
    if (cc.params.C.is_constant() && cc.params.Ftilde.is_constant()) break;
  }

  auto rhs = [&](double t, const Mat& Psi) -> Mat {
    const CCBlocks b = cc.at(t);
    Mat M(2 * N6, 2 * N6);
    M << b.At1, b.Bt1, b.At2, b.Bt2;
    return -Psi * M;
  };
  MatTrajectory Psi;
  try {
    Psi = integrate_ode<Mat>(rhs, Mat(Mat::Identity(2 * N6, 2 * N6)), grid, Direction::Backward);
  } catch (const Error& e) {
    rethrow_blowup("explicit_K_reduced", e);
  }

  const Mat& Gt = cc.nodes.back().Gt;
  Mat left(N6, 2 * N6);
  left << -Gt, Mat::Identity(N6, N6);
  std::vector<Mat> out(grid.size());
  for (int k = 0; k <= grid.steps(); ++k) {
    const Mat rows = left * Psi[k];
    const Mat lhs = rows.rightCols(N6);
    Eigen::JacobiSVD<Mat> svd(lhs);
    const double smin = svd.singularValues().minCoeff();
    if (smin < kSingularTol) {
      throw Error(ErrorKind::NearSingular, "explicit_K_reduced",
                  "smallest singular value " + std::to_string(smin) + " at t = " + std::to_string(grid.time(k)));
    }
    out[k] = -lhs.partialPivLu().solve(rows.leftCols(N6));
  }
  return MatTrajectory(grid, std::move(out));
}

MeanFields extract_mean_fields(const CCMatrices& cc, const MatTrajectory& K, const VecTrajectory& kappa,
                               const TimeGrid& grid) {
  require_grid(K, grid, "extract_mean_fields", "K");
  require_grid(kappa, grid, "extract_mean_fields", "kappa");
  const int n = cc.n();
  const int N3 = 3 * n;

  auto y1_of = [&](const Mat& Kt, const Vec& kt, const Vec& X1) -> Vec {
    return Kt.topLeftCorner(N3, N3) * X1 + kt.head(N3);
  };
  auto rhs = [&](double t, const Vec& X1) -> Vec {
    const CCBlocks b = cc.at(t);
    return (b.A1 + b.A1bar) * X1 + b.B1 * y1_of(K.at(t), kappa.at(t), X1);
  };
  MeanFields mf;
  try {
    mf.X1 = integrate_ode<Vec>(rhs, Vec(cc.nodes.front().xit0.head(N3)), grid, Direction::Forward);
  } catch (const Error& e) {
    rethrow_blowup("extract_mean_fields", e);
  }

  const std::size_t size = grid.size();
  std::vector<Vec> Y1(size), xhat(size), y1(size), y2(size), beta1(size), phi(size);
  for (int k = 0; k <= grid.steps(); ++k) {
    const CCBlocks b = cc.at(grid.time(k));
    Y1[k] = y1_of(K[k], kappa[k], mf.X1[k]);
    Vec Xt = Vec::Zero(2 * N3);
    Xt.head(N3) = mf.X1[k];
    const Vec EZ = K[k] * (b.At1p + b.Bt1p * K[k]) * Xt + K[k] * b.Bt1p * kappa[k];
    xhat[k] = mf.X1[k].head(n);
    phi[k] = Y1[k].head(n);
    y1[k] = Y1[k].segment(n, n);
    y2[k] = Y1[k].segment(2 * n, n);
    beta1[k] = EZ.segment(N3 + n, n);
  }
  mf.Y1 = VecTrajectory(grid, std::move(Y1));
  mf.xhat = VecTrajectory(grid, std::move(xhat));
  mf.phi = VecTrajectory(grid, std::move(phi));
  mf.y1hat = VecTrajectory(grid, std::move(y1));
  mf.y2hat = VecTrajectory(grid, std::move(y2));
  mf.beta1hat = VecTrajectory(grid, std::move(beta1));
  return mf;
}

double decoupling_residual(const CCMatrices& cc, const MatTrajectory& K, DecouplingForm form) {
  const TimeGrid& grid = K.grid;
  double worst = 0.0;
  for (int k = 1; k < grid.steps(); ++k) {
    const Mat diff = (K[k + 1] - K[k - 1]) / (2.0 * grid.dt());
    worst = std::max(worst, detail::max_abs(Mat(diff - decoupling_rhs(cc.at(grid.time(k)), K[k], form))));
  }
  return worst;
}

namespace {

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_stage(std::string("solve_cc/") + name);
  }
}

}  // namespace

CCResult solve_cc(const ModelParams& params, const TimeGrid& grid, DecouplingForm form) {
  CCResult out;
  PSolution p = stage("solve_P", [&] { return solve_P(params, grid); });
  CCMatrices cc = stage("build_cc", [&] { return build_cc(params, p.P); });
  out.cc.K = stage("solve_K", [&] { return solve_K(cc, grid, form); });
  out.cc.kappa = stage("solve_kappa", [&] { return solve_kappa(cc, out.cc.K, grid); });
  out.cc.condition37 = stage("check_condition_37", [&] { return check_condition_37(cc, grid); });
  if (!out.cc.condition37.holds) {
    out.cc.warnings.push_back("solvability condition not certified: |det| = " +
                              std::to_string(std::abs(out.cc.condition37.determinant)));
  }
  out.cc.mean = stage("extract_mean_fields", [&] { return extract_mean_fields(cc, out.cc.K, out.cc.kappa, grid); });
  const MeanFields& mf = out.cc.mean;
  VecTrajectory phi =
      stage("solve_phi", [&] { return solve_phi(p.P, params, mf.xhat, mf.y1hat, mf.y2hat, mf.beta1hat); });
  out.cc.dual_route_gap = max_distance(phi, mf.phi);
  out.cc.decoupling_residual = decoupling_residual(cc, out.cc.K, form);
  out.cc.regularity_margin = p.regularity_margin;

  out.law.Theta1 = stage("theta1", [&] { return theta1(p.P, params); });
  out.law.Theta2 = stage("theta2", [&] { return theta2(p.P, phi, mf.xhat, params); });
  out.law.phi = std::move(phi);
  out.law.P = std::move(p.P);
  out.law.regularity_margin = p.regularity_margin;
  return out;
}

CCResult solve_cc(const ModelParams& params) { return solve_cc(params, params.grid); }

}  // namespace mflqg
