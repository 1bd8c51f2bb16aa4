#pragma once

#include <string>
#include <vector>

#include "mflqg/time_grid.hpp"

namespace mflqg {

// Matrix-valued coefficient on the master grid: either a single constant
// value or one sample per node (read by linear interpolation in between).
class Coefficient {
 public:
  Coefficient() = default;
  explicit Coefficient(Mat constant);
  explicit Coefficient(std::vector<Mat> samples);

  bool is_constant() const noexcept { return samples_.size() == 1; }
  bool empty() const noexcept { return samples_.empty(); }
  const std::vector<Mat>& samples() const noexcept { return samples_; }
  Eigen::Index rows() const { return samples_.empty() ? 0 : samples_.front().rows(); }
  Eigen::Index cols() const { return samples_.empty() ? 0 : samples_.front().cols(); }

  const Mat& node(int k) const { return is_constant() ? samples_.front() : samples_[k]; }
  Mat at(const TimeGrid& grid, double t) const;

  // Largest max-norm over all samples.
  double max_abs() const;

  bool operator==(const Coefficient& other) const;

 private:
  std::vector<Mat> samples_;
};

// All coefficients frozen at one time instant.
struct CoefficientSlice {
  Mat A, B, C, D, F, Ftilde, Q, R, Gamma;
  Vec eta;
};

// Problem data for the N-agent system
//   dx_i = (A x_i + B u_i + F x^(N)) dt + (C x_i + D u_i + Ftilde x^(N)) dW_i,  x_i(0) = xi0
//   J_i  = 1/2 E[ int |x_i - Gamma x^(N) - eta|_Q^2 + |u_i|_R^2 dt + |x_i(T) - GammaBar x^(N)(T) - etaBar|_G^2 ].
struct ModelParams {
  int n = 0;
  int m = 0;
  TimeGrid grid;
  Coefficient A, B, C, D, F, Ftilde, Q, R, Gamma;
  Coefficient eta;  // n x 1
  Mat G, GammaBar;
  Vec etaBar, xi0;

  CoefficientSlice at(double t) const;
  CoefficientSlice node(int k) const;
  bool time_varying() const;
  double horizon() const { return grid.horizon(); }

  bool operator==(const ModelParams& other) const;
};

// Every violated admissibility condition, one line each. Empty means admissible.
std::vector<std::string> validate(const ModelParams& params);

// Throws Error{InvalidArgument} listing the report when validate() is non-empty.
void require_valid(const ModelParams& params, const char* stage);

// Convenience constructor for constant coefficients; G, GammaBar, etaBar
// default to zero when left empty.
struct ConstantModel {
  int n = 1, m = 1;
  double T = 1.0;
  int steps = 1000;
  Mat A, B, C, D, F, Ftilde, Q, R, G, Gamma, GammaBar;
  Vec eta, etaBar, xi0;
};
ModelParams make_constant_model(const ConstantModel& spec);

// Scalar (n = m = 1) constant model.
struct ScalarModel {
  double A = 0, B = 0, C = 0, D = 0, F = 0, Ftilde = 0, Q = 0, R = 1, G = 0, Gamma = 0, GammaBar = 0;
  double eta = 0, etaBar = 0, xi0 = 0;
  double T = 1.0;
  int steps = 1000;
};
ModelParams make_scalar_model(const ScalarModel& spec);

// Two-dimensional benchmark coefficients (n = m = 2, T = 1) with G = 0,
// GammaBar = 0, etaBar = 0; also shipped as configs/example_n2.json.
ModelParams builtin_example_params(int steps = 1000);

}  // namespace mflqg
