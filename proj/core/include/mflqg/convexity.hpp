#pragma once

#include <array>
#include <map>
#include <string>

#include "mflqg/model.hpp"

namespace mflqg {

enum class ConvexityStatus { Convex, UniformlyConvex, NotVerified };

std::string_view to_string(ConvexityStatus status);

// NotVerified means the sufficient condition failed; it never asserts
// non-convexity. `reason` names the failed inequality or hypothesis.
struct ConvexityVerdict {
  ConvexityStatus status = ConvexityStatus::NotVerified;
  std::string criterion;
  std::string reason;
  std::map<std::string, double> witness;

  bool convex() const { return status != ConvexityStatus::NotVerified; }
};

// Q, R, G >= 0 gives Convex; additionally R >> 0 gives UniformlyConvex.
ConvexityVerdict check_psd_case(const ModelParams& params);

// Qhat = (Gamma - I)^T Q (Gamma - I) at node k, Ghat likewise with GammaBar.
Mat q_hat(const ModelParams& params, int node);
Mat g_hat(const ModelParams& params);

// Tightest admissible shifts Q - Qhat (at t = 0) and G - Ghat.
Mat default_delta_Q(const ModelParams& params);
Mat default_delta_G(const ModelParams& params);

// Decoupled case (F = Ftilde = 0): the low-dimensional Riccati with weights
// (Q - dQ, R, G - dG) must exist with R + D^T P D >> 0. Throws CouplingPresent.
ConvexityVerdict check_decoupled_indefinite(const ModelParams& params, const Mat& dQ, const Mat& dG);

// The five candidate constants, maximized over grid nodes.
std::array<double, 5> growth_terms(const ModelParams& params);
double growth_constant(const ModelParams& params);

// K e^{2KT} lambda_min(Q - dQ) + lambda_min(R) / 2 >= 0 (> 0 for uniform convexity).
ConvexityVerdict check_coupled_indefinite(const ModelParams& params, const Mat& dQ);

}  // namespace mflqg
