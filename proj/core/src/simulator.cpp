#include "mflqg/simulator.hpp"

#include <cmath>

#include "mflqg/ode.hpp"
#include "mflqg/parallel.hpp"

namespace mflqg {

double sample_mean(const Vec& v) { return v.size() == 0 ? 0.0 : v.mean(); }

double standard_error(const Vec& v) {
  const auto n = v.size();
  if (n < 2) return 0.0;
  const double mean = v.mean();
  const double var = (v.array() - mean).square().sum() / static_cast<double>(n - 1);
  return std::sqrt(var / static_cast<double>(n));
}

VecTrajectory SimResult::mean_average() const {
  std::vector<Vec> out(grid.size(), Vec::Zero(n));
  for (const auto& path : average) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += path[k];
  }
  for (auto& v : out) v /= static_cast<double>(average.size());
  return VecTrajectory(grid, std::move(out));
}

double SimResult::mean_social_cost() const { return sample_mean(social_costs); }
double SimResult::social_cost_se() const { return standard_error(social_costs); }

namespace {

// Per-node coefficients, shared read-only by all paths.
class SliceCache {
 public:
  explicit SliceCache(const ModelParams& p) {
    const int count = p.time_varying() ? p.grid.steps() + 1 : 1;
    slices_.reserve(count);
    for (int k = 0; k < count; ++k) slices_.push_back(p.node(k));
  }
  const CoefficientSlice& operator[](int k) const { return slices_.size() == 1 ? slices_.front() : slices_[k]; }

 private:
  std::vector<CoefficientSlice> slices_;
};

// Trapezoid accumulation of the per-agent running costs plus the terminal term.
struct CostAccumulator {
  Vec running;
  void add(const CoefficientSlice& s, const Mat& X, const Mat& U, const Vec& xbar, double weight) {
    const Vec target = s.Gamma * xbar + s.eta;
    const Mat dev = X.colwise() - target;
    running += 0.5 * weight *
               ((dev.array() * (s.Q * dev).array()).colwise().sum() + (U.array() * (s.R * U).array()).colwise().sum())
                   .matrix()
                   .transpose();
  }
  void terminal(const ModelParams& p, const Mat& X, const Vec& xbar) {
    const Vec target = p.GammaBar * xbar + p.etaBar;
    const Mat dev = X.colwise() - target;
    running += 0.5 * (dev.array() * (p.G * dev).array()).colwise().sum().matrix().transpose();
  }
};

bool store_full(const ModelParams& p, int N, const SimOptions& o) {
  if (o.store == StoreMode::Always) return true;
  if (o.store == StoreMode::Never) return false;
  const double scalars = static_cast<double>(N) * o.paths * p.grid.size() * (p.n + p.m);
  return scalars <= static_cast<double>(kMaxStoredScalars);
}

SimResult prepare(const ModelParams& p, int N, const NoiseBank& noise, const SimOptions& o) {
  if (N < 1) throw Error(ErrorKind::InvalidN, "simulate", "N must be >= 1");
  if (o.paths < 1) throw Error(ErrorKind::InvalidArgument, "simulate", "paths must be >= 1");
  if (std::abs(noise.dt() - p.grid.dt()) > 1e-15 * (1.0 + p.grid.dt())) {
    throw Error(ErrorKind::GridMismatch, "simulate", "noise bank step differs from the grid step");
  }
  if (o.reference) require_grid(*o.reference, p.grid, "simulate", "reference trajectory");
  SimResult r;
  r.N = N;
  r.n = p.n;
  r.m = p.m;
  r.paths = o.paths;
  r.seed = noise.seed();
  r.grid = p.grid;
  r.has_trajectories = store_full(p, N, o);
  if (r.has_trajectories) {
    r.states.resize(o.paths);
    r.controls.resize(o.paths);
  }
  r.average.resize(o.paths);
  r.agent_costs = Mat::Zero(o.paths, N);
  r.social_costs = Vec::Zero(o.paths);
  if (o.reference) {
    r.sup_average_deviation = Vec::Zero(o.paths);
    r.sup_agent_deviation = Vec::Zero(o.paths);
  }
  return r;
}

// Shared per-path driver. `advance(k, X, U, dW)` performs the Euler step on
// the n x N agent matrix; `control(k, X, U)` fills the controls.
template <class Control, class Advance>
void run_path(const ModelParams& p, int N, const NoiseBank& noise, const SimOptions& o, const SliceCache& slices,
              std::size_t path, SimResult& r, const Control& control, const Advance& advance) {
  const int steps = p.grid.steps();
  const double dt = p.grid.dt();
  Mat X = p.xi0.replicate(1, N);
  Mat U(p.m, N);
  Vec dW(N);
  CostAccumulator cost{Vec::Zero(N)};
  std::vector<Vec> avg(p.grid.size());
  std::vector<Mat>* states = r.has_trajectories ? &r.states[path] : nullptr;
  std::vector<Mat>* controls = r.has_trajectories ? &r.controls[path] : nullptr;
  if (states) {
    states->reserve(p.grid.size());
    controls->reserve(p.grid.size());
  }
  double sup_avg = 0.0, sup_agent = 0.0;

  for (int k = 0; k <= steps; ++k) {
    const double t = p.grid.time(k);
    const Vec xbar = X.rowwise().sum() / static_cast<double>(N);
    control(k, t, X, U);
    const CoefficientSlice& s = slices[k];
    cost.add(s, X, U, xbar, (k == 0 || k == steps) ? 0.5 * dt : dt);
    avg[k] = xbar;
    if (states) {
      states->push_back(X);
      controls->push_back(U);
    }
    if (o.reference) {
      const Vec& ref = (*o.reference)[k];
      sup_avg = std::max(sup_avg, (xbar - ref).squaredNorm());
      sup_agent = std::max(sup_agent, (X.col(0) - ref).squaredNorm());
    }
    if (k == steps) {
      cost.terminal(p, X, xbar);
      break;
    }
    for (int i = 0; i < N; ++i) dW(i) = noise.increment(path, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k));
    advance(k, s, X, U, xbar, dW);
    if (!X.allFinite()) {
      throw Error(ErrorKind::NonFinite, "simulate",
                  "state left the finite range at step " + std::to_string(k) + ", path " + std::to_string(path));
    }
  }
  r.average[path] = VecTrajectory(p.grid, std::move(avg));
  r.agent_costs.row(path) = cost.running.transpose();
  r.social_costs(path) = cost.running.sum();
  if (o.reference) {
    r.sup_average_deviation(path) = sup_avg;
    r.sup_agent_deviation(path) = sup_agent;
  }
}

}  // namespace

SimResult simulate_agents(const ModelParams& p, int N, const NoiseBank& noise, const AgentControl& control,
                          const SimOptions& o) {
  SimResult r = prepare(p, N, noise, o);
  const SliceCache slices(p);
  const double dt = p.grid.dt();
  auto advance = [&](int, const CoefficientSlice& s, Mat& X, const Mat& U, const Vec& xbar, const Vec& dW) {
    Mat drift = s.A * X + s.B * U;
    drift.colwise() += s.F * xbar;
    Mat diffusion = s.C * X + s.D * U;
    diffusion.colwise() += s.Ftilde * xbar;
    X += drift * dt + diffusion * dW.asDiagonal();
  };
  parallel_for(
      static_cast<std::size_t>(o.paths),
      [&](std::size_t path) { run_path(p, N, noise, o, slices, path, r, control, advance); }, o.threads);
  return r;
}

SimResult simulate_augmented(const ModelParams& p, int N, const NoiseBank& noise, const StackedControl& control,
                             const SimOptions& o) {
  SimResult r = prepare(p, N, noise, o);
  const SliceCache slices(p);
  std::vector<AugmentedSystem> aug;
  const int count = p.time_varying() ? p.grid.steps() + 1 : 1;
  for (int k = 0; k < count; ++k) aug.push_back(build_augmented(p, N, k));
  const double dt = p.grid.dt();
  const int n = p.n, m = p.m;

  auto stacked_control = [&](int k, double t, const Mat& X, Mat& U) {
    const Vec x = Eigen::Map<const Vec>(X.data(), X.size());
    Vec u(N * m);
    control(k, t, x, u);
    U = Eigen::Map<const Mat>(u.data(), m, N);
  };
  auto advance = [&](int k, const CoefficientSlice&, Mat& X, const Mat& U, const Vec&, const Vec& dW) {
    const AugmentedSystem& a = aug.size() == 1 ? aug.front() : aug[k];
    const Vec x = Eigen::Map<const Vec>(X.data(), X.size());
    const Vec u = Eigen::Map<const Vec>(U.data(), U.size());
    Vec next = x + (a.A * x + a.B * u) * dt;
    const Vec diffusion = a.Cs * x + a.Ds * u;
    for (int i = 0; i < N; ++i) next.segment(i * n, n) += diffusion.segment(i * n, n) * dW(i);
    X = Eigen::Map<const Mat>(next.data(), n, N);
  };
  parallel_for(
      static_cast<std::size_t>(o.paths),
      [&](std::size_t path) { run_path(p, N, noise, o, slices, path, r, stacked_control, advance); }, o.threads);
  return r;
}

SimResult simulate_decentralized(const ModelParams& p, const FeedbackLaw& law, int N, const NoiseBank& noise,
                                 const SimOptions& o) {
  require_grid(law.Theta1, p.grid, "simulate_decentralized", "Theta1");
  require_grid(law.Theta2, p.grid, "simulate_decentralized", "Theta2");
  auto control = [&](int k, double, const Mat& X, Mat& U) {
    U.noalias() = law.Theta1[k] * X;
    U.colwise() += law.Theta2[k];
  };
  try {
    return simulate_agents(p, N, noise, control, o);
  } catch (const Error& e) {
    throw e.with_stage("simulate_decentralized");
  }
}

SimResult simulate_centralized(const ModelParams& p, const OracleLaw& law, const NoiseBank& noise,
                               const SimOptions& o, const Perturbation& perturbation) {
  require_grid(law.Theta, p.grid, "simulate_centralized", "Theta");
  require_grid(law.v, p.grid, "simulate_centralized", "v");
  auto control = [&](int k, double t, const Vec& x, Vec& u) {
    u.noalias() = law.Theta[k] * x;
    u += law.v[k];
    if (perturbation) u += perturbation(t);
  };
  try {
    return simulate_augmented(p, law.N, noise, control, o);
  } catch (const Error& e) {
    throw e.with_stage("simulate_centralized");
  }
}

CostSummary social_cost(const SimResult& r, const ModelParams& p) {
  if (!r.has_trajectories) {
    throw Error(ErrorKind::MissingTrajectories, "social_cost", "simulation kept no per-agent trajectories");
  }
  const SliceCache slices(p);
  Mat costs(r.paths, r.N);
  for (int path = 0; path < r.paths; ++path) {
    const auto& states = r.states[path];
    const auto& controls = r.controls[path];
    for (int i = 0; i < r.N; ++i) {
      std::vector<double> running(r.grid.size());
      for (int k = 0; k <= r.grid.steps(); ++k) {
        const CoefficientSlice& s = slices[k];
        const Vec xbar = states[k].rowwise().mean();
        const Vec dev = states[k].col(i) - s.Gamma * xbar - s.eta;
        const Vec u = controls[k].col(i);
        running[k] = dev.dot(s.Q * dev) + u.dot(s.R * u);
      }
      const Vec xbarT = states.back().rowwise().mean();
      const Vec devT = states.back().col(i) - p.GammaBar * xbarT - p.etaBar;
      costs(path, i) = 0.5 * (quadrature(ScalarTrajectory(r.grid, std::move(running))) + devT.dot(p.G * devT));
    }
  }
  CostSummary out;
  const Vec soc = costs.rowwise().sum();
  out.J_soc = sample_mean(soc);
  out.se = standard_error(soc);
  out.J_agent = costs.colwise().mean().transpose();
  out.se_agent = Vec(r.N);
  for (int i = 0; i < r.N; ++i) out.se_agent(i) = standard_error(costs.col(i));
  return out;
}

}  // namespace mflqg
