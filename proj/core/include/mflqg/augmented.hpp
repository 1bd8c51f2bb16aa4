#pragma once

#include "mflqg/model.hpp"

namespace mflqg {

// Lifted N*n-dimensional system at one time instant. The per-agent noise
// matrices C_i, D_i each have a single nonzero block row, so only the stack
// of those rows is stored:
//   Cs = [row_1(C_1); ...; row_N(C_N)],  Ds = I (x) D.
// Then sum_i C_i^T X C_i = Cs^T bdiag(X_ii) Cs and likewise for the D terms.
struct AugmentedSystem {
  int N = 0, n = 0, m = 0;
  Mat A, B, Cs, Ds, Q, R, G;
  Vec S1, S2, Xi;
  Mat Qhat, Ghat;
  // Constant parts of the running and terminal costs: N eta^T Q eta, N etaBar^T G etaBar.
  double c1 = 0.0, c2 = 0.0;

  Mat C(int i) const;
  Mat D(int i) const;

  // sum_i C_i^T X C_i, sum_i C_i^T X D_i, sum_i D_i^T X D_i.
  Mat sum_CtXC(const Mat& X) const;
  Mat sum_CtXD(const Mat& X) const;
  Mat sum_DtXD(const Mat& X) const;

  // Diffusion of agent i: block row i of C_i x + D_i u.
  Vec diffusion(int i, const Vec& x, const Vec& u) const;
};

inline constexpr int kMaxAugmentedDim = 64;

// Augmented matrices at grid node k. Throws InvalidN for N < 1 and TooLarge
// when N n exceeds kMaxAugmentedDim.
AugmentedSystem build_augmented(const ModelParams& params, int N, int node);
// Same, with coefficients interpolated at time t.
AugmentedSystem build_augmented_at(const ModelParams& params, int N, double t);

// Cost of a stacked trajectory in quadratic form:
//   1/2 int x^T Q x + 2 S1^T x + c1 + u^T R u dt + 1/2 (x_T^T G x_T + 2 S2^T x_T + c2).
// x and u are sampled on params.grid.
double augmented_cost(const ModelParams& params, int N, const VecTrajectory& x, const VecTrajectory& u);

}  // namespace mflqg
