#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mflqg/noise.hpp"
#include "mflqg/oracle.hpp"
#include "mflqg/riccati.hpp"

namespace mflqg {

enum class StoreMode { Auto, Always, Never };

// Full per-agent storage under StoreMode::Auto is limited to this many scalars.
inline constexpr std::size_t kMaxStoredScalars = std::size_t{1} << 24;

struct SimOptions {
  int paths = 1;
  int threads = 0;
  StoreMode store = StoreMode::Auto;
  // When set, per-path sup over nodes of |xavg - ref|^2 and |x_1 - ref|^2 are recorded.
  const VecTrajectory* reference = nullptr;
};

struct SimResult {
  int N = 0, n = 0, m = 0, paths = 0;
  std::uint64_t seed = 0;
  TimeGrid grid;
  bool has_trajectories = false;
  std::vector<std::vector<Mat>> states;    // [path][node], n x N
  std::vector<std::vector<Mat>> controls;  // [path][node], m x N
  std::vector<VecTrajectory> average;      // [path], state average
  Mat agent_costs;                         // paths x N
  Vec social_costs;                        // paths
  Vec sup_average_deviation;               // paths, when a reference was given
  Vec sup_agent_deviation;

  // Path average of the state-average trajectory.
  VecTrajectory mean_average() const;
  double mean_social_cost() const;
  double social_cost_se() const;
};

// Control callbacks receive the node index, its time and the current state.
using AgentControl = std::function<void(int node, double t, const Mat& X, Mat& U)>;
using StackedControl = std::function<void(int node, double t, const Vec& x, Vec& u)>;

// Euler-Maruyama of the N-agent system with coefficients frozen at the left
// node; the state average is recomputed before every step.
SimResult simulate_agents(const ModelParams& params, int N, const NoiseBank& noise, const AgentControl& control,
                          const SimOptions& options);

// Same scheme on the lifted system dx = (A x + B u) dt + sum_i (C_i x + D_i u) dW_i.
SimResult simulate_augmented(const ModelParams& params, int N, const NoiseBank& noise, const StackedControl& control,
                             const SimOptions& options);

// u_i = Theta1 x_i + Theta2.
SimResult simulate_decentralized(const ModelParams& params, const FeedbackLaw& law, int N, const NoiseBank& noise,
                                 const SimOptions& options);

// u = Theta x + v + perturbation(t).
using Perturbation = std::function<Vec(double t)>;
SimResult simulate_centralized(const ModelParams& params, const OracleLaw& law, const NoiseBank& noise,
                               const SimOptions& options, const Perturbation& perturbation = {});

struct CostSummary {
  double J_soc = 0.0;
  double se = 0.0;
  Vec J_agent;
  Vec se_agent;
};

// Recomputes per-agent costs from stored trajectories by trapezoid
// quadrature. Throws MissingTrajectories when the result kept none.
CostSummary social_cost(const SimResult& result, const ModelParams& params);

double sample_mean(const Vec& v);
double standard_error(const Vec& v);

}  // namespace mflqg
