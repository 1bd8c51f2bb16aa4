#include "mflqg/convexity.hpp"

#include <cmath>
#include <limits>

#include "mflqg/ode.hpp"
#include "mflqg/riccati.hpp"

namespace mflqg {

std::string_view to_string(ConvexityStatus status) {
  switch (status) {
    case ConvexityStatus::Convex: return "Convex";
    case ConvexityStatus::UniformlyConvex: return "UniformlyConvex";
    case ConvexityStatus::NotVerified: return "NotVerified";
  }
  return "NotVerified";
}

namespace {

constexpr double kPsdTol = 1e-10;

int node_count(const ModelParams& p) { return p.time_varying() ? p.grid.steps() + 1 : 1; }

double min_over_nodes(const ModelParams& p, const auto& fn) {
  double out = std::numeric_limits<double>::infinity();
  for (int k = 0; k < node_count(p); ++k) out = std::min(out, fn(p.node(k), k));
  return out;
}

ConvexityVerdict not_verified(std::string criterion, std::string reason) {
  ConvexityVerdict v;
  v.criterion = std::move(criterion);
  v.reason = std::move(reason);
  return v;
}

}  // namespace

Mat q_hat(const ModelParams& params, int node) {
  const auto s = params.node(node);
  const Mat I = Mat::Identity(params.n, params.n);
  return (s.Gamma - I).transpose() * s.Q * (s.Gamma - I);
}

Mat g_hat(const ModelParams& params) {
  const Mat I = Mat::Identity(params.n, params.n);
  return (params.GammaBar - I).transpose() * params.G * (params.GammaBar - I);
}

Mat default_delta_Q(const ModelParams& params) { return symmetrize(params.Q.node(0) - q_hat(params, 0)); }
Mat default_delta_G(const ModelParams& params) { return symmetrize(params.G - g_hat(params)); }

ConvexityVerdict check_psd_case(const ModelParams& params) {
  const char* criterion = "psd weights";
  const double q = min_over_nodes(params, [](const CoefficientSlice& s, int) { return lambda_min(s.Q); });
  const double r = min_over_nodes(params, [](const CoefficientSlice& s, int) { return lambda_min(s.R); });
  const double g = lambda_min(params.G);
  ConvexityVerdict v;
  v.criterion = criterion;
  v.witness = {{"lambda_min_Q", q}, {"lambda_min_R", r}, {"lambda_min_G", g}};
  if (q < -kPsdTol) {
    v.reason = "Q is not positive semidefinite";
  } else if (r < -kPsdTol) {
    v.reason = "R is not positive semidefinite";
  } else if (g < -kPsdTol) {
    v.reason = "G is not positive semidefinite";
  } else if (r > kPsdTol) {
    v.status = ConvexityStatus::UniformlyConvex;
    v.witness["margin"] = r;
  } else {
    v.status = ConvexityStatus::Convex;
  }
  return v;
}

ConvexityVerdict check_decoupled_indefinite(const ModelParams& params, const Mat& dQ, const Mat& dG) {
  const char* criterion = "decoupled indefinite";
  for (int k = 0; k < node_count(params); ++k) {
    const auto s = params.node(k);
    if (detail::max_abs(s.F) != 0.0 || detail::max_abs(s.Ftilde) != 0.0) {
      throw Error(ErrorKind::CouplingPresent, "check_decoupled_indefinite", "F and Ftilde must vanish");
    }
  }
  const double qq = min_over_nodes(params, [&](const CoefficientSlice& s, int k) {
    return lambda_min(symmetrize(s.Q - q_hat(params, k)));
  });
  const double gg = lambda_min(symmetrize(params.G - g_hat(params)));
  if (qq < -kPsdTol) return not_verified(criterion, "Q - Qhat is not positive semidefinite");
  if (gg < -kPsdTol) return not_verified(criterion, "G - Ghat is not positive semidefinite");
  const double dq = min_over_nodes(params, [&](const CoefficientSlice& s, int k) {
    return lambda_min(symmetrize(dQ - (s.Q - q_hat(params, k))));
  });
  if (dq < -kPsdTol) return not_verified(criterion, "dQ >= Q - Qhat fails");
  if (lambda_min(symmetrize(dG - (params.G - g_hat(params)))) < -kPsdTol) {
    return not_verified(criterion, "dG >= G - Ghat fails");
  }

  std::vector<Mat> shifted;
  for (const auto& q : params.Q.samples()) shifted.push_back(symmetrize(q - dQ));
  const Coefficient Qw = shifted.size() == 1 ? Coefficient(shifted.front()) : Coefficient(std::move(shifted));
  ConvexityVerdict v;
  v.criterion = criterion;
  try {
    const PSolution sol = solve_P_weights(params, params.grid, Qw, symmetrize(params.G - dG));
    v.status = ConvexityStatus::UniformlyConvex;
    v.witness["margin"] = sol.regularity_margin;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BlowUp && e.kind() != ErrorKind::RegularityLost) throw;
    v.reason = std::string("shifted Riccati equation failed: ") + e.what();
  }
  return v;
}

std::array<double, 5> growth_terms(const ModelParams& params) {
  std::array<double, 5> out;
  out.fill(-std::numeric_limits<double>::infinity());
  for (int k = 0; k < node_count(params); ++k) {
    const auto s = params.node(k);
    const Mat Ct = s.C.transpose();
    const Mat Dt = s.D.transpose();
    const Mat FC = s.Ftilde + s.C;
    const double mixed = lambda_max(symmetrize(
        Dt * (s.Ftilde * s.Ftilde.transpose() + s.C * s.Ftilde.transpose() + s.Ftilde * Ct) * s.D));
    const std::array<double, 5> terms = {
        lambda_max(symmetrize(s.A.transpose() + s.A)) + lambda_max(symmetrize(s.F.transpose() + s.F)),
        lambda_max(symmetrize(Ct * s.C + FC.transpose() * FC)),
        std::sqrt(std::max(0.0, lambda_max(symmetrize(s.B.transpose() * s.B)))),
        std::sqrt(std::max(0.0, mixed + lambda_max(symmetrize(Dt * s.C * Ct * s.D)))),
        lambda_max(symmetrize(Dt * s.D)),
    };
    for (int i = 0; i < 5; ++i) out[i] = std::max(out[i], terms[i]);
  }
  return out;
}

double growth_constant(const ModelParams& params) {
  double K = 0.0;
  for (double t : growth_terms(params)) K = std::max(K, t);
  return K;
}

ConvexityVerdict check_coupled_indefinite(const ModelParams& params, const Mat& dQ) {
  const char* criterion = "coupled indefinite";
  if (lambda_min(params.G) < -kPsdTol) return not_verified(criterion, "G is not positive semidefinite");
  const double qq = min_over_nodes(params, [&](const CoefficientSlice& s, int k) {
    return lambda_min(symmetrize(s.Q - q_hat(params, k)));
  });
  if (qq < -kPsdTol) return not_verified(criterion, "Q - Qhat is not positive semidefinite");
  const double dq = min_over_nodes(params, [&](const CoefficientSlice& s, int k) {
    return lambda_min(symmetrize(dQ - (s.Q - q_hat(params, k))));
  });
  if (dq < -kPsdTol) return not_verified(criterion, "dQ >= Q - Qhat fails");
  const double lq =
      min_over_nodes(params, [&](const CoefficientSlice& s, int) { return lambda_min(symmetrize(s.Q - dQ)); });
  if (lq > kPsdTol) return not_verified(criterion, "lambda_min(Q - dQ) <= 0 fails");
  const double lr = min_over_nodes(params, [](const CoefficientSlice& s, int) { return lambda_min(s.R); });

  const double K = growth_constant(params);
  const double T = params.horizon();
  const double value = K * std::exp(2.0 * K * T) * lq + 0.5 * lr;
  ConvexityVerdict v;
  v.criterion = criterion;
  v.witness = {{"K", K}, {"lambda_min_Q_minus_dQ", lq}, {"lambda_min_R", lr}, {"value", value}};
  if (value > 0.0) {
    v.status = ConvexityStatus::UniformlyConvex;
    v.witness["margin"] = value;
  } else if (value == 0.0) {
    v.status = ConvexityStatus::Convex;
  } else {
    v.reason = "K e^{2KT} lambda_min(Q - dQ) + lambda_min(R)/2 < 0";
  }
  return v;
}

}  // namespace mflqg
