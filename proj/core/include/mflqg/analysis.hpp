#pragma once

#include <cstdint>
#include <vector>

#include "mflqg/oracle.hpp"
#include "mflqg/riccati.hpp"

namespace mflqg {

struct ConvergenceRow {
  int N = 0;
  int replications = 0;
  double estimate = 0.0;        // mean of sup_t |xavg - xhat|^2
  double se = 0.0;
  double agent_estimate = 0.0;  // mean of sup_t |x_1 - xhat|^2
  double agent_se = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
};

struct StudyOptions {
  int threads = 0;
};

// Least-squares fit of log(y) against log(x); returns {slope, intercept}.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// For each N, `replications` independent decentralized simulations; the
// stream for N is keyed by mix_seed(seed, N).
ConvergenceTable convergence_study(const ModelParams& params, const FeedbackLaw& law, const VecTrajectory& xhat,
                                   const std::vector<int>& N_list, int replications, std::uint64_t seed,
                                   const StudyOptions& options = {});

struct GapRow {
  int N = 0;
  int paths = 0;
  double decentralized = 0.0;  // J_soc / N
  double decentralized_se = 0.0;
  double centralized = 0.0;
  double centralized_se = 0.0;
  double gap = 0.0;            // paired per-path difference / N
  double gap_se = 0.0;
  bool stationarity_passed = false;
};

struct GapOptions {
  int threads = 0;
  StationarityOptions stationarity;
};

// Decentralized law versus the centralized oracle under common noise. Both
// laws share the NoiseBank keyed by mix_seed(seed, N).
std::vector<GapRow> gap_study(const ModelParams& params, const FeedbackLaw& law, const std::vector<int>& N_list,
                              int paths, std::uint64_t seed, const GapOptions& options = {});

struct LambdaPair {
  int N = 0;
  MatTrajectory Lambda1, Lambda2;
  double sup1 = 0.0, sup2 = 0.0;  // sup over t of the max-norm
  bool bounded = false;           // |Lambda| <= Lambda bar element-wise at every node
};

struct LambdaStudy {
  double L = 0.0;
  MatTrajectory bound1, bound2;
  std::vector<LambdaPair> pairs;
  bool bounded = false;
  double spread1 = 0.0, spread2 = 0.0;  // (max - min) / max of the sup norms across N
};

// Coupled backward pair
//   L1dot + L1(A + B Th1 + F/N) + A^T L1 - C^T L1 (C + D Th1 + Ftilde/N) + L2 F / N + Q = 0,
//   L2dot + L2(A + B Th1 + (N-1)F/N) + A^T L2 + (N-1)/N (L1 F - C^T L1 Ftilde) = 0,
// L1(T) = G, L2(T) = 0, against the N-independent comparison pair
//   B1dot + 3L B1 E + L E B1 + 3L E B1 E + L E B2 + L E = 0,
//   B2dot + 2L B2 E + L E B2 + L(B1 E + E B1 E) = 0,
// B1(T) = |G|, B2(T) = 0, where E is the all-ones matrix.
LambdaStudy lambda_boundedness(const ModelParams& params, const MatTrajectory& P, const std::vector<int>& N_list);

}  // namespace mflqg
