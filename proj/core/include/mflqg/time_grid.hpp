#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mflqg/error.hpp"

namespace mflqg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Uniform grid t_k = k T / M on [0, T]; the last node is T exactly.
class TimeGrid {
 public:
  TimeGrid() : TimeGrid(1.0, 1000) {}
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(steps_) + 1; }

  double time(int k) const noexcept { return k == steps_ ? horizon_ : k * dt_; }

  // Interval index k and weight w with t = (1-w) t_k + w t_{k+1}; t is clamped to [0, T].
  std::pair<int, double> locate(double t) const noexcept;

  bool operator==(const TimeGrid& other) const noexcept {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  double horizon_;
  int steps_;
  double dt_;
};

namespace detail {
inline bool all_finite(double v) { return std::isfinite(v); }
inline bool all_finite(const Mat& v) { return v.allFinite(); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline double max_abs(double v) { return std::abs(v); }
inline double max_abs(const Mat& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
inline double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
}  // namespace detail

// Sampled time-dependent quantity: one value per grid node. Between nodes the
// trajectory is read by linear interpolation.
template <class V>
struct Trajectory {
  TimeGrid grid;
  std::vector<V> values;

  Trajectory() = default;
  Trajectory(TimeGrid g, std::vector<V> v) : grid(g), values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  const V& operator[](std::size_t k) const { return values[k]; }
  V& operator[](std::size_t k) { return values[k]; }
  const V& front() const { return values.front(); }
  const V& back() const { return values.back(); }

  V at(double t) const {
    auto [k, w] = grid.locate(t);
    if (w == 0.0) return values[k];
    return (1.0 - w) * values[k] + w * values[k + 1];
  }

  double max_abs() const {
    double out = 0.0;
    for (const auto& v : values) out = std::max(out, detail::max_abs(v));
    return out;
  }
};

using MatTrajectory = Trajectory<Mat>;
using VecTrajectory = Trajectory<Vec>;
using ScalarTrajectory = Trajectory<double>;

template <class V>
void require_grid(const Trajectory<V>& traj, const TimeGrid& grid, const char* stage, const char* what) {
  if (!(traj.grid == grid) || traj.size() != grid.size()) {
    throw Error(ErrorKind::GridMismatch, stage, std::string(what) + " is not sampled on the working grid");
  }
}

// Max-norm distance between two trajectories on the same grid.
template <class V>
double max_distance(const Trajectory<V>& a, const Trajectory<V>& b) {
  double out = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) out = std::max(out, detail::max_abs(V(a[k] - b[k])));
  return out;
}

}  // namespace mflqg
