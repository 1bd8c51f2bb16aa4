#pragma once

#include "mflqg/model.hpp"

namespace mflqg {

inline constexpr double kRegularityTol = 1e-10;

struct PSolution {
  MatTrajectory P;
  double regularity_margin = 0.0;  // min over nodes of lambda_min(R + D^T P D)
};

// Decentralized feedback u = Theta1 x + Theta2.
struct FeedbackLaw {
  MatTrajectory P;
  VecTrajectory phi;
  MatTrajectory Theta1;
  VecTrajectory Theta2;
  double regularity_margin = 0.0;
};

// Inverse of Sigma = R + D^T P D. Throws RegularityLost when lambda_min(Sigma) <= kRegularityTol.
Mat regular_inverse(const Mat& sigma, const char* stage, double t);

// Right side of
//   Pdot = -[PA + A^T P + C^T P C + Q - (PB + C^T P D) Sigma^{-1} (B^T P + D^T P C)].
Mat riccati_rhs(const CoefficientSlice& s, const Mat& P, double t);

// Backward RK4 from P(T) = G with symmetrization after every step.
// Throws RegularityLost or BlowUp.
PSolution solve_P(const ModelParams& params, const TimeGrid& grid);

// Max over interior nodes of |(P_{k+1} - P_{k-1}) / (2 dt) - rhs(P_k)|.
double riccati_residual(const ModelParams& params, const MatTrajectory& P);

// Same equation with the state weights replaced, used by the convexity checks.
PSolution solve_P_weights(const ModelParams& params, const TimeGrid& grid, const Coefficient& Q, const Mat& G);

// Theta1 = -Sigma^{-1}(B^T P + D^T P C), node-wise.
MatTrajectory theta1(const MatTrajectory& P, const ModelParams& params);
Mat theta1_at(const CoefficientSlice& s, const Mat& P, double t);

// Affine adjoint
//   phidot = -[Pi1^T phi + (C + D Theta1)^T P Ftilde xhat + P F xhat + q1],  phi(T) = q2,
//   q1 = -Q(Gamma xhat + eta) - Gamma^T Q[(I - Gamma) xhat - eta] + F^T y2 + F^T y1 + Ftilde^T beta1,
//   q2 = -G(GammaBar xhat_T + etaBar) - GammaBar^T G[(I - GammaBar) xhat_T - etaBar].
VecTrajectory solve_phi(const MatTrajectory& P, const ModelParams& params, const VecTrajectory& xhat,
                        const VecTrajectory& y1hat, const VecTrajectory& y2hat, const VecTrajectory& beta1hat);

// Theta2 = -Sigma^{-1}(B^T phi + D^T P Ftilde xhat), node-wise.
VecTrajectory theta2(const MatTrajectory& P, const VecTrajectory& phi, const VecTrajectory& xhat,
                     const ModelParams& params);

}  // namespace mflqg
