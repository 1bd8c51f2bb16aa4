#include "mflqg/time_grid.hpp"

#include <cmath>
#include <string>

namespace mflqg {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps), dt_(0.0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::InvalidArgument, "TimeGrid", "horizon must be positive and finite");
  }
  if (steps < 2) {
    throw Error(ErrorKind::InvalidArgument, "TimeGrid", "need at least 2 steps, got " + std::to_string(steps));
  }
  dt_ = horizon / steps;
}

std::pair<int, double> TimeGrid::locate(double t) const noexcept {
  if (t <= 0.0) return {0, 0.0};
  if (t >= horizon_) return {steps_, 0.0};
  double s = t / dt_;
  int k = static_cast<int>(std::floor(s));
  if (k >= steps_) return {steps_, 0.0};
  double w = s - k;
  // Snap values within roundoff of a node so node reads stay exact.
  if (w < 1e-12) return {k, 0.0};
  if (w > 1.0 - 1e-12) return {k + 1, 0.0};
  return {k, w};
}

}  // namespace mflqg
