#pragma once

#include <random>

#include "mflqg/model.hpp"

namespace mflqg::testing {

inline Mat random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng);
  return m;
}

inline Mat random_psd(std::mt19937_64& rng, int n, double scale = 1.0) {
  const Mat l = random_matrix(rng, n, n, scale);
  return l * l.transpose();
}

inline Vec random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

// Random constant model with psd weights and R >> 0.
inline ModelParams random_model(std::mt19937_64& rng, int n, int m, int steps = 200, double scale = 0.5) {
  ConstantModel c;
  c.n = n;
  c.m = m;
  c.T = 1.0;
  c.steps = steps;
  c.A = random_matrix(rng, n, n, scale);
  c.B = random_matrix(rng, n, m, scale);
  c.C = random_matrix(rng, n, n, scale);
  c.D = random_matrix(rng, n, m, scale);
  c.F = random_matrix(rng, n, n, scale);
  c.Ftilde = random_matrix(rng, n, n, scale);
  c.Q = random_psd(rng, n, scale);
  c.R = random_psd(rng, m, scale) + Mat::Identity(m, m);
  c.G = random_psd(rng, n, scale);
  c.Gamma = random_matrix(rng, n, n, scale);
  c.GammaBar = random_matrix(rng, n, n, scale);
  c.eta = random_vector(rng, n);
  c.etaBar = random_vector(rng, n);
  c.xi0 = random_vector(rng, n);
  return make_constant_model(c);
}

}  // namespace mflqg::testing
