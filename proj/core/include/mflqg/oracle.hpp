#pragma once

#include <cstdint>
#include <vector>

#include "mflqg/augmented.hpp"
#include "mflqg/riccati.hpp"

namespace mflqg {

// Centralized optimal law u* = Theta x + v for the lifted N n-dimensional problem.
struct OracleLaw {
  int N = 0;
  MatTrajectory P;      // N n x N n
  VecTrajectory phi;    // N n
  MatTrajectory Theta;  // N m x N n
  VecTrajectory v;      // N m
  double regularity_margin = 0.0;
};

struct StationarityOptions {
  int directions = 5;
  double h = 1e-4;
  int paths = 256;
  std::uint64_t seed = 20240917;
  double tolerance = 1e-2;
  int threads = 0;
};

struct StationarityReport {
  bool passed = false;
  double cost = 0.0;                     // J(u*)
  std::vector<double> derivatives;       // centered differences, one per direction
  std::vector<double> bounds;            // tolerance * |du| * (1 + |J|)
  std::vector<double> forward_changes;   // J(u* + h du) - J(u*)
  std::vector<double> slacks;
};

// Backward integration of
//   Pdot = -[PA + A^T P + sum C_i^T P C_i + Q - (PB + sum C_i^T P D_i) Sigma^{-1} (B^T P + sum D_i^T P C_i)],
//   Sigma = R + sum D_i^T P D_i,  P(T) = G,
//   phidot = -[(A + B Theta)^T phi + S1],  phi(T) = S2,
// with Theta = -Sigma^{-1}(B^T P + sum D_i^T P C_i) and v = -Sigma^{-1} B^T phi.
OracleLaw integrate_oracle(const ModelParams& params, int N, const TimeGrid& grid);

// Finite-difference stationarity test of J at u* along random smooth
// open-loop directions, under common random numbers.
StationarityReport check_stationarity(const ModelParams& params, const OracleLaw& law,
                                      const StationarityOptions& options = {});

// integrate_oracle followed by the mandatory stationarity test; throws
// StationarityFailed when any direction fails.
OracleLaw solve_oracle(const ModelParams& params, int N, const StationarityOptions& options = {},
                       StationarityReport* report = nullptr);

}  // namespace mflqg
