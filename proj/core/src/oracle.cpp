#include "mflqg/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "mflqg/ode.hpp"
#include "mflqg/simulator.hpp"

namespace mflqg {

namespace {

struct OracleGains {
  Mat Theta, sigma_inv;
};

OracleGains gains(const AugmentedSystem& a, const Mat& P, double t) {
  const Mat sigma = a.R + a.sum_DtXD(P);
  OracleGains g;
  g.sigma_inv = regular_inverse(sigma, "solve_oracle", t);
  g.Theta = -g.sigma_inv * (a.B.transpose() * P + a.sum_CtXD(P).transpose());
  return g;
}

}  // namespace

OracleLaw integrate_oracle(const ModelParams& params, int N, const TimeGrid& grid) {
  require_valid(params, "solve_oracle");
  const AugmentedSystem terminal = build_augmented_at(params, N, grid.horizon());
  OracleLaw law;
  law.N = N;

  auto riccati = [&](double t, const Mat& P) -> Mat {
    const AugmentedSystem a = build_augmented_at(params, N, t);
    const Mat sigma = a.R + a.sum_DtXD(P);
    const Mat L = P * a.B + a.sum_CtXD(P);
    const Mat inv = regular_inverse(sigma, "solve_oracle", t);
    return -(P * a.A + a.A.transpose() * P + a.sum_CtXC(P) + a.Q - L * inv * L.transpose());
  };
  try {
    law.P = integrate_ode<Mat>(riccati, terminal.G, grid, Direction::Backward, [](Mat& P) { P = symmetrize(P); });
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NonFinite) throw Error(ErrorKind::BlowUp, "solve_oracle", e.what());
    throw;
  }

  auto affine = [&](double t, const Vec& phi) -> Vec {
    const AugmentedSystem a = build_augmented_at(params, N, t);
    const OracleGains g = gains(a, law.P.at(t), t);
    return -((a.A + a.B * g.Theta).transpose() * phi + a.S1);
  };
  law.phi = integrate_ode<Vec>(affine, terminal.S2, grid, Direction::Backward);

  std::vector<Mat> Theta(grid.size());
  std::vector<Vec> v(grid.size());
  law.regularity_margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= grid.steps(); ++k) {
    const double t = grid.time(k);
    const AugmentedSystem a = build_augmented_at(params, N, t);
    const OracleGains g = gains(a, law.P[k], t);
    Theta[k] = g.Theta;
    v[k] = -g.sigma_inv * a.B.transpose() * law.phi[k];
    law.regularity_margin = std::min(law.regularity_margin, lambda_min(a.R + a.sum_DtXD(law.P[k])));
  }
  law.Theta = MatTrajectory(grid, std::move(Theta));
  law.v = VecTrajectory(grid, std::move(v));
  return law;
}

StationarityReport check_stationarity(const ModelParams& params, const OracleLaw& law,
                                      const StationarityOptions& options) {
  const int dim = law.N * params.m;
  const double T = params.horizon();
  const NoiseBank noise(options.seed, params.grid.dt());
  SimOptions sim;
  sim.paths = options.paths;
  sim.threads = options.threads;
  sim.store = StoreMode::Never;

  StationarityReport report;
  report.cost = simulate_centralized(params, law, noise, sim).mean_social_cost();

  std::mt19937_64 rng(mix_seed(options.seed, 0x5eed));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  constexpr int kModes = 3;
  report.passed = true;
  for (int d = 0; d < options.directions; ++d) {
    Mat coef(dim, 2 * kModes);
    for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = unif(rng);
    auto shape = [coef, T](double t) -> Vec {
      Vec out = Vec::Zero(coef.rows());
      for (int j = 0; j < kModes; ++j) {
        const double w = (j + 1) * std::numbers::pi * t / T;
        out += coef.col(2 * j) * std::sin(w) + coef.col(2 * j + 1) * std::cos(w);
      }
      return out;
    };
    double norm = 0.0;
    for (int k = 0; k <= params.grid.steps(); ++k) norm = std::max(norm, detail::max_abs(shape(params.grid.time(k))));
    const double scale = 1.0 / norm;
    const double h = options.h;
    const double plus =
        simulate_centralized(params, law, noise, sim, [&](double t) { return Vec(h * scale * shape(t)); })
            .mean_social_cost();
    const double minus =
        simulate_centralized(params, law, noise, sim, [&](double t) { return Vec(-h * scale * shape(t)); })
            .mean_social_cost();
    const double derivative = (plus - minus) / (2.0 * h);
    const double bound = options.tolerance * (1.0 + std::abs(report.cost));
    const double slack = h * bound + 1e-10 * (1.0 + std::abs(report.cost));
    report.derivatives.push_back(derivative);
    report.bounds.push_back(bound);
    report.forward_changes.push_back(plus - report.cost);
    report.slacks.push_back(slack);
    if (!(std::abs(derivative) <= bound) || !(plus - report.cost >= -slack)) report.passed = false;
  }
  return report;
}

OracleLaw solve_oracle(const ModelParams& params, int N, const StationarityOptions& options,
                       StationarityReport* report) {
  OracleLaw law = integrate_oracle(params, N, params.grid);
  StationarityReport r = check_stationarity(params, law, options);
  if (report) *report = r;
  if (!r.passed) {
    std::ostringstream os;
    os << "finite-difference derivatives:";
    for (std::size_t d = 0; d < r.derivatives.size(); ++d) os << ' ' << r.derivatives[d] << " (bound " << r.bounds[d] << ')';
    throw Error(ErrorKind::StationarityFailed, "solve_oracle", os.str());
  }
  return law;
}

}  // namespace mflqg
