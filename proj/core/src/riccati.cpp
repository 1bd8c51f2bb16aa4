#include "mflqg/riccati.hpp"

#include <limits>

#include "mflqg/ode.hpp"

namespace mflqg {

Mat regular_inverse(const Mat& sigma, const char* stage, double t) {
  const Mat s = symmetrize(sigma);
  const double lmin = lambda_min(s);
  if (!(lmin > kRegularityTol)) {
    throw Error(ErrorKind::RegularityLost, stage,
                "lambda_min(R + D^T P D) = " + std::to_string(lmin) + " at t = " + std::to_string(t));
  }
  return s.llt().solve(Mat::Identity(s.rows(), s.cols()));
}

Mat riccati_rhs(const CoefficientSlice& s, const Mat& P, double t) {
  const Mat sigma = s.R + s.D.transpose() * P * s.D;
  const Mat L = P * s.B + s.C.transpose() * P * s.D;
  const Mat inv = regular_inverse(sigma, "solve_P", t);
  return -(P * s.A + s.A.transpose() * P + s.C.transpose() * P * s.C + s.Q - L * inv * L.transpose());
}

namespace {

double margin_of(const ModelParams& params, const MatTrajectory& P) {
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= P.grid.steps(); ++k) {
    const auto s = params.at(P.grid.time(k));
    margin = std::min(margin, lambda_min(s.R + s.D.transpose() * P[k] * s.D));
  }
  return margin;
}

PSolution run_riccati(const ModelParams& params, const TimeGrid& grid, const Coefficient* Q, const Mat& G) {
  auto rhs = [&](double t, const Mat& P) {
    auto s = params.at(t);
    if (Q) s.Q = Q->at(params.grid, t);
    return riccati_rhs(s, P, t);
  };
  PSolution out;
  try {
    out.P = integrate_ode<Mat>(rhs, G, grid, Direction::Backward, [](Mat& P) { P = symmetrize(P); });
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NonFinite) throw Error(ErrorKind::BlowUp, "solve_P", e.what());
    throw;
  }
  out.regularity_margin = margin_of(params, out.P);
  if (!(out.regularity_margin > kRegularityTol)) {
    throw Error(ErrorKind::RegularityLost, "solve_P",
                "regularity margin " + std::to_string(out.regularity_margin) + " at a grid node");
  }
  return out;
}

}  // namespace

PSolution solve_P(const ModelParams& params, const TimeGrid& grid) {
  require_valid(params, "solve_P");
  return run_riccati(params, grid, nullptr, params.G);
}

PSolution solve_P_weights(const ModelParams& params, const TimeGrid& grid, const Coefficient& Q, const Mat& G) {
  return run_riccati(params, grid, &Q, G);
}

double riccati_residual(const ModelParams& params, const MatTrajectory& P) {
  const TimeGrid& grid = P.grid;
  double worst = 0.0;
  for (int k = 1; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const Mat diff = (P[k + 1] - P[k - 1]) / (2.0 * grid.dt());
    worst = std::max(worst, detail::max_abs(Mat(diff - riccati_rhs(params.at(t), P[k], t))));
  }
  return worst;
}

Mat theta1_at(const CoefficientSlice& s, const Mat& P, double t) {
  const Mat inv = regular_inverse(s.R + s.D.transpose() * P * s.D, "theta1", t);
  return -inv * (s.B.transpose() * P + s.D.transpose() * P * s.C);
}

MatTrajectory theta1(const MatTrajectory& P, const ModelParams& params) {
  std::vector<Mat> out(P.size());
  for (int k = 0; k <= P.grid.steps(); ++k) {
    const double t = P.grid.time(k);
    out[k] = theta1_at(params.at(t), P[k], t);
  }
  return MatTrajectory(P.grid, std::move(out));
}

VecTrajectory solve_phi(const MatTrajectory& P, const ModelParams& params, const VecTrajectory& xhat,
                        const VecTrajectory& y1hat, const VecTrajectory& y2hat, const VecTrajectory& beta1hat) {
  const TimeGrid& grid = P.grid;
  require_grid(xhat, grid, "solve_phi", "xhat");
  require_grid(y1hat, grid, "solve_phi", "y1hat");
  require_grid(y2hat, grid, "solve_phi", "y2hat");
  require_grid(beta1hat, grid, "solve_phi", "beta1hat");
  const int n = params.n;
  const Mat I = Mat::Identity(n, n);

  auto rhs = [&](double t, const Vec& phi) -> Vec {
    const auto s = params.at(t);
    const Mat Pt = P.at(t);
    const Vec x = xhat.at(t);
    const Mat th = theta1_at(s, Pt, t);
    const Mat pi1 = s.A + s.B * th;
    const Vec q1 = -s.Q * (s.Gamma * x + s.eta) - s.Gamma.transpose() * s.Q * ((I - s.Gamma) * x - s.eta) +
                   s.F.transpose() * y2hat.at(t) + s.F.transpose() * y1hat.at(t) +
                   s.Ftilde.transpose() * beta1hat.at(t);
    return -(pi1.transpose() * phi + (s.C + s.D * th).transpose() * Pt * s.Ftilde * x + Pt * s.F * x + q1);
  };
  const Vec& xT = xhat.back();
  const Vec q2 = -params.G * (params.GammaBar * xT + params.etaBar) -
                 params.GammaBar.transpose() * params.G * ((I - params.GammaBar) * xT - params.etaBar);
  return integrate_ode<Vec>(rhs, q2, grid, Direction::Backward);
}

VecTrajectory theta2(const MatTrajectory& P, const VecTrajectory& phi, const VecTrajectory& xhat,
                     const ModelParams& params) {
  require_grid(phi, P.grid, "theta2", "phi");
  require_grid(xhat, P.grid, "theta2", "xhat");
  std::vector<Vec> out(P.size());
  for (int k = 0; k <= P.grid.steps(); ++k) {
    const double t = P.grid.time(k);
    const auto s = params.at(t);
    const Mat inv = regular_inverse(s.R + s.D.transpose() * P[k] * s.D, "theta2", t);
    out[k] = -inv * (s.B.transpose() * phi[k] + s.D.transpose() * P[k] * s.Ftilde * xhat[k]);
  }
  return VecTrajectory(P.grid, std::move(out));
}

}  // namespace mflqg
