/**
 * @file scurve.hpp
 * @brief Jerk-limited trajectories built from trapezoidal acceleration
 *        profiles (7-segment S-curves).
 *
 * A plan starts from an arbitrary desired state (pose, velocity,
 * acceleration), brings every coordinate to rest with a jerk-limited braking
 * ramp, then runs a time-synchronized rest-to-rest S-curve to the target.
 * Synchronization slows faster axes by time scaling, which preserves all
 * limits. The resulting profile is C2 in position with piecewise-linear
 * acceleration and zero end derivatives.
 */
#pragma once

#include <array>
#include <vector>

#include "prsim/control.hpp"
#include "prsim/types.hpp"

namespace prsim {

struct MotionLimits {
  double v_max = 0.5;    // [m/s] (applied per coordinate, rad/s for x_r)
  double a_max = 10.0;   // [m/s^2]
  double j_max = 200.0;  // [m/s^3]

  void validate() const {
    if (!(v_max > 0.0) || !(a_max > 0.0) || !(j_max > 0.0))
      throw ConfigError("motion limits must be positive");
  }
};

class JerkLimitedTrajectory {
 public:
  JerkLimitedTrajectory() = default;

  /// Plans from `from` (current desired state) to rest at `to`.
  static JerkLimitedTrajectory plan(const DesiredState& from,
                                    const PlatformPose& to,
                                    const MotionLimits& limits);

  /// Exact sample; t is clamped to [0, duration].
  DesiredState sample(double t) const;

  /// Samples at fixed spacing, always including t = 0 and t = duration.
  std::vector<DesiredState> sample_series(double dt) const;

  double duration() const { return stop_duration_ + move_duration_; }
  const PlatformPose& target() const { return target_; }

  /// Analytic rest-to-rest duration of a single-axis move (used by the
  /// synchronizer; exposed for validation).
  static double rest_to_rest_duration(double dist, const MotionLimits& limits);

 private:
  struct Segment {
    double dt;
    double jerk;
  };
  struct Axis {
    double p0 = 0.0, v0 = 0.0, a0 = 0.0;
    std::vector<Segment> stop;   // braking ramp, ends at rest
    double stop_time = 0.0;
    double p_rest = 0.0;         // position where the axis is at rest
    std::vector<Segment> move;   // unscaled rest-to-rest profile
    double move_time = 0.0;      // unscaled duration
    double time_scale = 1.0;     // <= 1, slows the axis to the global time
    double p_end = 0.0;
  };

  static void eval_segments(const std::vector<Segment>& segs, double p0,
                            double v0, double a0, double t, double& p,
                            double& v, double& a);

  std::array<Axis, 3> axes_{};
  double stop_duration_ = 0.0;
  double move_duration_ = 0.0;
  PlatformPose target_;
};

}  // namespace prsim
