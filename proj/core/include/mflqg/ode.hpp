#pragma once

#include <functional>
#include <string>

#include "mflqg/time_grid.hpp"

namespace mflqg {

enum class Direction { Forward, Backward };


// Classical fixed-step RK4 on the grid. Forward runs start at t_0, backward
// runs start at t_M; the boundary value is stored unchanged at its anchor node.
// Throws Error{NonFinite} when any stage or node value is non-finite or
// exceeds the blow-up threshold.
template <class V, class Rhs, class PostStep>
Trajectory<V> integrate_ode(const Rhs& rhs, const V& boundary, const TimeGrid& grid, Direction direction,
                            PostStep&& post_step, double blowup_threshold = 1e12) {
  const int steps = grid.steps();
  std::vector<V> values(grid.size(), boundary);
  const double h = direction == Direction::Forward ? grid.dt() : -grid.dt();

  auto check = [&](const V& v, int node) {
    if (!detail::all_finite(v) || detail::max_abs(v) > blowup_threshold) {
      throw Error(ErrorKind::NonFinite, "integrate_ode",
                  "value left the finite range near t = " + std::to_string(grid.time(node)));
    }
  };

  check(boundary, direction == Direction::Forward ? 0 : steps);
  V y = boundary;
  for (int s = 0; s < steps; ++s) {
    const int from = direction == Direction::Forward ? s : steps - s;
    const int to = direction == Direction::Forward ? s + 1 : steps - s - 1;
    const double t = grid.time(from);
    const double tm = t + 0.5 * h;
    const double tn = grid.time(to);
    V k1 = rhs(t, y);
    V k2 = rhs(tm, V(y + (0.5 * h) * k1));
    V k3 = rhs(tm, V(y + (0.5 * h) * k2));
    V k4 = rhs(tn, V(y + h * k3));
    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    post_step(y);
    check(y, to);
    values[to] = y;
  }
  return Trajectory<V>(grid, std::move(values));
}

template <class V, class Rhs>
Trajectory<V> integrate_ode(const Rhs& rhs, const V& boundary, const TimeGrid& grid, Direction direction) {
  return integrate_ode<V>(rhs, boundary, grid, direction, [](V&) {});
}

// Composite trapezoid rule over the grid.
double quadrature(const ScalarTrajectory& values);

// Symmetric part (S + S^T)/2.
Mat symmetrize(const Mat& s);

// Ascending eigenvalues of a symmetric matrix. Throws NotSymmetric when
// ||S - S^T||_max > 1e-8 (1 + ||S||_max); the symmetric part is decomposed.
Vec eig_sym(const Mat& s);

double lambda_min(const Mat& s);
double lambda_max(const Mat& s);

// lambda_min(S) >= -tol.
bool is_psd(const Mat& s, double tol = 1e-10);

double symmetry_tolerance(const Mat& s);
double asymmetry(const Mat& s);

// E (x) M: every block equal to M.
Mat all_blocks(const Mat& block, int count);
// I (x) M: M on the block diagonal.
Mat block_diag(const Mat& block, int count);

}  // namespace mflqg
