#include "mflqg/analysis.hpp"

#include <cmath>
#include <limits>
#include <tuple>

#include "mflqg/ode.hpp"
#include "mflqg/simulator.hpp"

namespace mflqg {

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::InvalidArgument, "loglog_fit", "need at least two points");
  Mat design(n, 2);
  Vec rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::InvalidArgument, "loglog_fit", "values must be positive");
    design(i, 0) = std::log(x[i]);
    design(i, 1) = 1.0;
    rhs(i) = std::log(y[i]);
  }
  const Vec coef = design.colPivHouseholderQr().solve(rhs);
  return {coef(0), coef(1)};
}

ConvergenceTable convergence_study(const ModelParams& params, const FeedbackLaw& law, const VecTrajectory& xhat,
                                   const std::vector<int>& N_list, int replications, std::uint64_t seed,
                                   const StudyOptions& options) {
  require_grid(xhat, params.grid, "convergence_study", "xhat");
  ConvergenceTable table;
  std::vector<double> xs, ys;
  for (int N : N_list) {
    const NoiseBank noise(mix_seed(seed, static_cast<std::uint64_t>(N)), params.grid.dt());
    SimOptions sim;
    sim.paths = replications;
    sim.threads = options.threads;
    sim.store = StoreMode::Never;
    sim.reference = &xhat;
    const SimResult r = simulate_decentralized(params, law, N, noise, sim);
    ConvergenceRow row;
    row.N = N;
    row.replications = replications;
    row.estimate = sample_mean(r.sup_average_deviation);
    row.se = standard_error(r.sup_average_deviation);
    row.agent_estimate = sample_mean(r.sup_agent_deviation);
    row.agent_se = standard_error(r.sup_agent_deviation);
    table.rows.push_back(row);
    xs.push_back(N);
    ys.push_back(row.estimate);
  }
  bool positive = xs.size() >= 2;
  for (double y : ys) positive = positive && y > 0.0;
  if (positive) std::tie(table.slope, table.intercept) = loglog_fit(xs, ys);
  return table;
}

std::vector<GapRow> gap_study(const ModelParams& params, const FeedbackLaw& law, const std::vector<int>& N_list,
                              int paths, std::uint64_t seed, const GapOptions& options) {
  std::vector<GapRow> rows;
  for (int N : N_list) {
    StationarityReport report;
    OracleLaw oracle;
    try {
      oracle = solve_oracle(params, N, options.stationarity, &report);
    } catch (const Error& e) {
      throw e.with_stage("gap_study");
    }
    const NoiseBank noise(mix_seed(seed, static_cast<std::uint64_t>(N)), params.grid.dt());
    SimOptions sim;
    sim.paths = paths;
    sim.threads = options.threads;
    sim.store = StoreMode::Never;
    const SimResult dec = simulate_decentralized(params, law, N, noise, sim);
    const SimResult cen = simulate_centralized(params, oracle, noise, sim);
    const Vec diff = dec.social_costs - cen.social_costs;
    GapRow row;
    row.N = N;
    row.paths = paths;
    row.decentralized = dec.mean_social_cost() / N;
    row.decentralized_se = dec.social_cost_se() / N;
    row.centralized = cen.mean_social_cost() / N;
    row.centralized_se = cen.social_cost_se() / N;
    row.gap = sample_mean(diff) / N;
    row.gap_se = standard_error(diff) / N;
    row.stationarity_passed = report.passed;
    rows.push_back(row);
  }
  return rows;
}

namespace {

double coefficient_bound(const ModelParams& params, const MatTrajectory& Theta1) {
  double L = 0.0;
  for (int k = 0; k <= params.grid.steps(); ++k) {
    const auto s = params.node(k);
    for (const Mat& m : {s.A, Mat(s.B * Theta1[k]), s.F, s.C, Mat(s.D * Theta1[k]), s.Ftilde, s.Q}) {
      L = std::max(L, detail::max_abs(m));
    }
  }
  return L;
}

}  // namespace

LambdaStudy lambda_boundedness(const ModelParams& params, const MatTrajectory& P, const std::vector<int>& N_list) {
  require_grid(P, params.grid, "lambda_boundedness", "P");
  const int n = params.n;
  const TimeGrid& grid = params.grid;
  const MatTrajectory Theta1 = theta1(P, params);
  LambdaStudy study;
  study.L = coefficient_bound(params, Theta1);
  const double L = study.L;
  const Mat E = Mat::Ones(n, n);

  // Stacked [B1, B2] so both bound matrices advance together.
  auto bound_rhs = [&](double, const Mat& Y) -> Mat {
    const Mat b1 = Y.leftCols(n), b2 = Y.rightCols(n);
    Mat out(n, 2 * n);
    out.leftCols(n) = -(3 * L * b1 * E + L * E * b1 + 3 * L * E * b1 * E + L * E * b2 + L * E);
    out.rightCols(n) = -(2 * L * b2 * E + L * E * b2 + L * (b1 * E + E * b1 * E));
    return out;
  };
  Mat terminal = Mat::Zero(n, 2 * n);
  terminal.leftCols(n) = params.G.cwiseAbs();
  MatTrajectory bounds;
  try {
    bounds = integrate_ode<Mat>(bound_rhs, terminal, grid, Direction::Backward);
  } catch (const Error& e) {
    throw Error(ErrorKind::BlowUp, "lambda_boundedness", e.what());
  }
  std::vector<Mat> b1(grid.size()), b2(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    b1[k] = bounds[k].leftCols(n);
    b2[k] = bounds[k].rightCols(n);
  }
  study.bound1 = MatTrajectory(grid, std::move(b1));
  study.bound2 = MatTrajectory(grid, std::move(b2));

  study.bounded = true;
  for (int N : N_list) {
    if (N < 1) throw Error(ErrorKind::InvalidN, "lambda_boundedness", "N must be >= 1");
    const double inv = 1.0 / N;
    const double frac = (N - 1.0) / N;
    auto rhs = [&](double t, const Mat& Y) -> Mat {
      const auto s = params.at(t);
      const Mat th = Theta1.at(t);
      const Mat l1 = Y.leftCols(n), l2 = Y.rightCols(n);
      const Mat closed = s.A + s.B * th;
      const Mat Ct = s.C.transpose();
      Mat out(n, 2 * n);
      out.leftCols(n) = -(l1 * (closed + inv * s.F) + s.A.transpose() * l1 -
                          Ct * l1 * (s.C + s.D * th + inv * s.Ftilde) + inv * l2 * s.F + s.Q);
      out.rightCols(n) = -(l2 * (closed + frac * s.F) + s.A.transpose() * l2 +
                           frac * (l1 * s.F - Ct * l1 * s.Ftilde));
      return out;
    };
    Mat start = Mat::Zero(n, 2 * n);
    start.leftCols(n) = params.G;
    MatTrajectory Y;
    try {
      Y = integrate_ode<Mat>(rhs, start, grid, Direction::Backward);
    } catch (const Error& e) {
      throw Error(ErrorKind::BlowUp, "lambda_boundedness", e.what());
    }
    LambdaPair pair;
    pair.N = N;
    std::vector<Mat> l1(grid.size()), l2(grid.size());
    pair.bounded = true;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      l1[k] = Y[k].leftCols(n);
      l2[k] = Y[k].rightCols(n);
      pair.sup1 = std::max(pair.sup1, detail::max_abs(l1[k]));
      pair.sup2 = std::max(pair.sup2, detail::max_abs(l2[k]));
      const double slack = 1e-12 * (1.0 + detail::max_abs(study.bound1[k]) + detail::max_abs(study.bound2[k]));
      if (((l1[k].cwiseAbs() - study.bound1[k]).array() > slack).any() ||
          ((l2[k].cwiseAbs() - study.bound2[k]).array() > slack).any()) {
        pair.bounded = false;
      }
    }
    pair.Lambda1 = MatTrajectory(grid, std::move(l1));
    pair.Lambda2 = MatTrajectory(grid, std::move(l2));
    study.bounded = study.bounded && pair.bounded;
    study.pairs.push_back(std::move(pair));
  }

  auto spread = [&](auto member) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& p : study.pairs) {
      lo = std::min(lo, p.*member);
      hi = std::max(hi, p.*member);
    }
    return hi > 0.0 ? (hi - lo) / hi : 0.0;
  };
  if (!study.pairs.empty()) {
    study.spread1 = spread(&LambdaPair::sup1);
    study.spread2 = spread(&LambdaPair::sup2);
  }
  return study;
}

}  // namespace mflqg
