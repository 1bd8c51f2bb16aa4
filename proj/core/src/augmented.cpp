#include "mflqg/augmented.hpp"

#include "mflqg/ode.hpp"

namespace mflqg {

Mat AugmentedSystem::C(int i) const {
  Mat out = Mat::Zero(N * n, N * n);
  out.middleRows(i * n, n) = Cs.middleRows(i * n, n);
  return out;
}

Mat AugmentedSystem::D(int i) const {
  Mat out = Mat::Zero(N * n, N * m);
  out.block(i * n, i * m, n, m) = Ds.block(i * n, i * m, n, m);
  return out;
}

namespace {
Mat diag_blocks(const Mat& X, int N, int n) {
  Mat out = Mat::Zero(N * n, N * n);
  for (int i = 0; i < N; ++i) out.block(i * n, i * n, n, n) = X.block(i * n, i * n, n, n);
  return out;
}
}  // namespace

Mat AugmentedSystem::sum_CtXC(const Mat& X) const { return Cs.transpose() * diag_blocks(X, N, n) * Cs; }
Mat AugmentedSystem::sum_CtXD(const Mat& X) const { return Cs.transpose() * diag_blocks(X, N, n) * Ds; }
Mat AugmentedSystem::sum_DtXD(const Mat& X) const { return Ds.transpose() * diag_blocks(X, N, n) * Ds; }

Vec AugmentedSystem::diffusion(int i, const Vec& x, const Vec& u) const {
  return Cs.middleRows(i * n, n) * x + Ds.block(i * n, i * m, n, m) * u.segment(i * m, m);
}

namespace {

AugmentedSystem assemble(const ModelParams& p, int N, const CoefficientSlice& s) {
  if (N < 1) throw Error(ErrorKind::InvalidN, "build_augmented", "N must be >= 1, got " + std::to_string(N));
  const int n = p.n, m = p.m;
  if (N * n > kMaxAugmentedDim) {
    throw Error(ErrorKind::TooLarge, "build_augmented",
                "N*n = " + std::to_string(N * n) + " exceeds " + std::to_string(kMaxAugmentedDim));
  }
  const double inv = 1.0 / N;
  const Mat I = Mat::Identity(n, n);

  AugmentedSystem a;
  a.N = N;
  a.n = n;
  a.m = m;
  a.A = block_diag(s.A, N) + all_blocks(inv * s.F, N);
  a.B = Mat::Zero(N * n, N * m);
  a.Ds = Mat::Zero(N * n, N * m);
  for (int i = 0; i < N; ++i) {
    a.B.block(i * n, i * m, n, m) = s.B;
    a.Ds.block(i * n, i * m, n, m) = s.D;
  }
  a.Cs = block_diag(s.C, N) + all_blocks(inv * s.Ftilde, N);
  a.R = block_diag(s.R, N);

  a.Qhat = (s.Gamma - I).transpose() * s.Q * (s.Gamma - I);
  a.Ghat = (p.GammaBar - I).transpose() * p.G * (p.GammaBar - I);
  a.Q = symmetrize(block_diag(s.Q, N) + all_blocks(inv * (a.Qhat - s.Q), N));
  a.G = symmetrize(block_diag(p.G, N) + all_blocks(inv * (a.Ghat - p.G), N));

  const Vec s1 = s.Gamma.transpose() * s.Q * s.eta - s.Q * s.eta;
  const Vec s2 = p.GammaBar.transpose() * p.G * p.etaBar - p.G * p.etaBar;
  a.S1 = s1.replicate(N, 1);
  a.S2 = s2.replicate(N, 1);
  a.Xi = p.xi0.replicate(N, 1);
  a.c1 = N * s.eta.dot(s.Q * s.eta);
  a.c2 = N * p.etaBar.dot(p.G * p.etaBar);
  return a;
}

}  // namespace

AugmentedSystem build_augmented(const ModelParams& params, int N, int node) {
  return assemble(params, N, params.node(node));
}

AugmentedSystem build_augmented_at(const ModelParams& params, int N, double t) {
  return assemble(params, N, params.at(t));
}

double augmented_cost(const ModelParams& params, int N, const VecTrajectory& x, const VecTrajectory& u) {
  require_grid(x, params.grid, "augmented_cost", "state trajectory");
  require_grid(u, params.grid, "augmented_cost", "control trajectory");
  std::vector<double> running(params.grid.size());
  AugmentedSystem a;
  for (int k = 0; k <= params.grid.steps(); ++k) {
    a = build_augmented(params, N, k);
    const Vec& xk = x[k];
    const Vec& uk = u[k];
    running[k] = xk.dot(a.Q * xk) + 2.0 * a.S1.dot(xk) + a.c1 + uk.dot(a.R * uk);
  }
  const Vec& xT = x.back();
  const double terminal = xT.dot(a.G * xT) + 2.0 * a.S2.dot(xT) + a.c2;
  return 0.5 * quadrature(ScalarTrajectory(params.grid, std::move(running))) + 0.5 * terminal;
}

}  // namespace mflqg
