#pragma once

#include <string>
#include <vector>

#include "mflqg/riccati.hpp"

namespace mflqg {

// Coefficient blocks of the consistency-condition system at one instant.
// 3n stacking: X = (x, 0, 0), Y = (phi, y1, y2), Z = (0, beta1, 0):
//   dX = (A1 X + A1bar EX + B1 Y) dt + (A1p X + A1pbar EX + B1p Y) dW,
//   dY = (A2 X + A2bar EX + B2 Y + B2bar EY + C2 Z + C2bar EZ + f) dt + Z dW,
//   Y(T) = Gbar X(T) + Gbarp EX(T) + g.
// 6n stacking splits each process into mean and fluctuation: Xt = (EX, X - EX).
struct CCBlocks {
  Mat Pi1, Pi2, Pi3, Pi4, Pi1p, Pi2p, Pi3p;
  Mat A1, A1bar, B1, A1p, A1pbar, B1p, A2, A2bar, B2, B2bar, C2, C2bar, Gbar, Gbarp;
  Vec f, g;
  Mat At1, Bt1, At1p, Bt1p, At2, Bt2, Ct2, Ct2bar, Gt;
  Vec ft, gt, xit0;
};

CCBlocks cc_blocks_at(const ModelParams& params, const Mat& P, double t);

struct CCMatrices {
  ModelParams params;
  MatTrajectory P;
  std::vector<CCBlocks> nodes;

  int n() const { return params.n; }
  const TimeGrid& grid() const { return P.grid; }
  // Blocks at an arbitrary time, with P interpolated between nodes.
  CCBlocks at(double t) const;
};

CCMatrices build_cc(const ModelParams& params, const MatTrajectory& P);

enum class DecouplingForm {
  // Kdot = At2 + Bt2 K - K(At1 + Bt1 K) + Ct2 K(At1p + Bt1p K) + Ct2bar K(At1p + Bt1p K) Pm,
  // Pm = diag(I, 0): the expectation term acts on the mean half only.
  Pathwise,
  // Kdot = At2 + Bt2 K - K(At1 + Bt1 K) + (Ct2 + Ct2bar) K(At1p + Bt1p K).
  ExpectationMatched,
};

Mat decoupling_rhs(const CCBlocks& b, const Mat& K, DecouplingForm form);

// Backward RK4 from K(T) = Gt. Throws BlowUp.
MatTrajectory solve_K(const CCMatrices& cc, const TimeGrid& grid, DecouplingForm form = DecouplingForm::Pathwise);

// kappadot = [Bt2 + (Ct2 + Ct2bar) K Bt1p - K Bt1] kappa + ft,  kappa(T) = gt.
VecTrajectory solve_kappa(const CCMatrices& cc, const MatTrajectory& K, const TimeGrid& grid);

struct Condition37 {
  bool holds = false;
  double determinant = 0.0;
};
inline constexpr double kSingularTol = 1e-8;

// Forward fundamental matrix of [[A1, B1], [A2 - Gbar A1 + (B2 - Gbar B1) Gbar, B2 - Gbar B1]];
// reports det of the lower-right 3n block of Phi(T, 0).
Condition37 check_condition_37(const CCMatrices& cc, const TimeGrid& grid);

// K(t) = -[(-Gt, I) Psi(T,t) (0, I)^T]^{-1} (-Gt, I) Psi(T,t) (I, 0)^T with Psi
// the fundamental matrix of [[At1, Bt1], [At2, Bt2]]. Requires C = Ftilde = 0.
// Throws NotReducedCase or NearSingular.
MatTrajectory explicit_K_reduced(const CCMatrices& cc, const TimeGrid& grid);

struct MeanFields {
  VecTrajectory X1, Y1;  // 3n deterministic mean halves
  VecTrajectory xhat, y1hat, y2hat, beta1hat, phi;
};

MeanFields extract_mean_fields(const CCMatrices& cc, const MatTrajectory& K, const VecTrajectory& kappa,
                               const TimeGrid& grid);

struct CCSolution {
  MatTrajectory K;
  VecTrajectory kappa;
  MeanFields mean;
  Condition37 condition37;
  double regularity_margin = 0.0;
  double dual_route_gap = 0.0;        // max |phi from Y1 - phi from the affine adjoint|
  double decoupling_residual = 0.0;   // max central-difference residual of the K equation
  std::vector<std::string> warnings;
};

struct CCResult {
  CCSolution cc;
  FeedbackLaw law;
};

// solve_P -> build_cc -> solve_K -> solve_kappa -> check_condition_37 -> mean fields
// -> solve_phi -> theta2. Errors are re-tagged with the failing stage.
CCResult solve_cc(const ModelParams& params, const TimeGrid& grid, DecouplingForm form = DecouplingForm::Pathwise);
CCResult solve_cc(const ModelParams& params);

// Max over interior nodes of |(K_{k+1} - K_{k-1}) / (2 dt) - rhs(K_k)|.
double decoupling_residual(const CCMatrices& cc, const MatTrajectory& K, DecouplingForm form);

}  // namespace mflqg
