#include "mflqg/ode.hpp"

#include <cmath>

namespace mflqg {

double quadrature(const ScalarTrajectory& values) {
  const auto& v = values.values;
  if (v.size() < 2) return 0.0;
  double inner = 0.0;
  for (std::size_t k = 1; k + 1 < v.size(); ++k) inner += v[k];
  double total = values.grid.dt() * (0.5 * (v.front() + v.back()) + inner);
  if (!std::isfinite(total)) throw Error(ErrorKind::NonFinite, "quadrature", "non-finite integrand");
  return total;
}

Mat symmetrize(const Mat& s) { return 0.5 * (s + s.transpose()); }

double asymmetry(const Mat& s) {
  if (s.size() == 0) return 0.0;
  return (s - s.transpose()).cwiseAbs().maxCoeff();
}

double symmetry_tolerance(const Mat& s) {
  double scale = s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff();
  return 1e-8 * (1.0 + scale);
}

Vec eig_sym(const Mat& s) {
  if (s.rows() != s.cols()) throw Error(ErrorKind::NotSymmetric, "eig_sym", "matrix is not square");
  if (!s.allFinite()) throw Error(ErrorKind::NonFinite, "eig_sym", "non-finite entry");
  if (asymmetry(s) > symmetry_tolerance(s)) {
    throw Error(ErrorKind::NotSymmetric, "eig_sym", "asymmetry " + std::to_string(asymmetry(s)));
  }
  if (s.size() == 0) return Vec();
  Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrize(s), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

double lambda_min(const Mat& s) { return eig_sym(s)(0); }
double lambda_max(const Mat& s) {
  Vec e = eig_sym(s);
  return e(e.size() - 1);
}

bool is_psd(const Mat& s, double tol) { return s.size() == 0 || lambda_min(s) >= -tol; }

Mat all_blocks(const Mat& block, int count) {
  Mat out(block.rows() * count, block.cols() * count);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) out.block(i * block.rows(), j * block.cols(), block.rows(), block.cols()) = block;
  return out;
}

Mat block_diag(const Mat& block, int count) {
  Mat out = Mat::Zero(block.rows() * count, block.cols() * count);
  for (int i = 0; i < count; ++i) out.block(i * block.rows(), i * block.cols(), block.rows(), block.cols()) = block;
  return out;
}

}  // namespace mflqg
