#include "prsim/scurve.hpp"

#include <cmath>

namespace prsim {

namespace {

constexpr double kTinyMove = 1e-12;

/// Rest-to-rest phase times for |distance| under (v, a, j):
/// jerk time, constant-acceleration time, cruise time.
void rest_to_rest_phases(double dist, const MotionLimits& lim, double& t_j,
                         double& t_a, double& t_v) {
  const double v = lim.v_max, a = lim.a_max, j = lim.j_max;
  t_j = t_a = t_v = 0.0;
  if (dist < kTinyMove) return;

  // Try the full profile that reaches v_max.
  if (v * j >= a * a) {
    t_j = a / j;
    t_a = v / a - a / j;
  } else {
    t_j = std::sqrt(v / j);
    t_a = 0.0;
  }
  const double d_acc = 0.5 * v * (t_a + 2.0 * t_j);
  if (dist >= 2.0 * d_acc) {
    t_v = (dist - 2.0 * d_acc) / v;
    return;
  }

  // v_max unreachable; try a profile that still saturates a_max.
  if (dist >= 2.0 * a * a * a / (j * j)) {
    t_j = a / j;
    t_a = (-3.0 * a * a / j +
           std::sqrt(a * a * a * a / (j * j) + 4.0 * a * dist)) /
          (2.0 * a);
    t_v = 0.0;
    return;
  }

  // Triangular jerk profile.
  t_j = std::cbrt(dist / (2.0 * j));
  t_a = 0.0;
  t_v = 0.0;
}

}  // namespace

double JerkLimitedTrajectory::rest_to_rest_duration(double dist,
                                                    const MotionLimits& lim) {
  double t_j, t_a, t_v;
  rest_to_rest_phases(std::abs(dist), lim, t_j, t_a, t_v);
  return 4.0 * t_j + 2.0 * t_a + t_v;
}

void JerkLimitedTrajectory::eval_segments(const std::vector<Segment>& segs,
                                          double p0, double v0, double a0,
                                          double t, double& p, double& v,
                                          double& a) {
  p = p0;
  v = v0;
  a = a0;
  for (const auto& seg : segs) {
    const double tau = std::min(t, seg.dt);
    p += v * tau + 0.5 * a * tau * tau + seg.jerk * tau * tau * tau / 6.0;
    v += a * tau + 0.5 * seg.jerk * tau * tau;
    a += seg.jerk * tau;
    t -= tau;
    if (t <= 0.0) break;
  }
}

JerkLimitedTrajectory JerkLimitedTrajectory::plan(const DesiredState& from,
                                                  const PlatformPose& to,
                                                  const MotionLimits& limits) {
  limits.validate();
  JerkLimitedTrajectory traj;
  const Vec3 p_from = Vec3(from.pose.t.x(), from.pose.t.y(), from.pose.r);
  const double j = limits.j_max, a_lim = limits.a_max;

  // Braking phase per axis: ramp the acceleration to zero, then a
  // trapezoidal deceleration to rest.
  traj.stop_duration_ = 0.0;
  for (int k = 0; k < 3; ++k) {
    Axis& ax = traj.axes_[k];
    ax.p0 = p_from[k];
    ax.v0 = from.vel[k];
    ax.a0 = from.acc[k];
    if (std::abs(ax.a0) > kTinyMove)
      ax.stop.push_back({std::abs(ax.a0) / j, ax.a0 > 0 ? -j : j});
    double p1, v1, a1;
    eval_segments(ax.stop, ax.p0, ax.v0, ax.a0, 1e300, p1, v1, a1);
    if (std::abs(v1) > kTinyMove) {
      const double dir = v1 > 0 ? -1.0 : 1.0;
      double t_j, t_a;
      if (std::abs(v1) * j >= a_lim * a_lim) {
        t_j = a_lim / j;
        t_a = std::abs(v1) / a_lim - a_lim / j;
      } else {
        t_j = std::sqrt(std::abs(v1) / j);
        t_a = 0.0;
      }
      ax.stop.push_back({t_j, dir * j});
      ax.stop.push_back({t_a, 0.0});
      ax.stop.push_back({t_j, -dir * j});
    }
    ax.stop_time = 0.0;
    for (const auto& s : ax.stop) ax.stop_time += s.dt;
    eval_segments(ax.stop, ax.p0, ax.v0, ax.a0, 1e300, ax.p_rest, v1, a1);
    traj.stop_duration_ = std::max(traj.stop_duration_, ax.stop_time);
  }

  // Rest-to-rest phase, time-synchronized to the slowest axis.
  traj.move_duration_ = 0.0;
  for (int k = 0; k < 3; ++k) {
    Axis& ax = traj.axes_[k];
    const double goal = (k == 2)
                            ? ax.p_rest + wrap_angle(to.r - wrap_angle(ax.p_rest))
                            : (k == 0 ? to.t.x() : to.t.y());
    const double dist = goal - ax.p_rest;
    ax.p_end = goal;
    double t_j, t_a, t_v;
    rest_to_rest_phases(std::abs(dist), limits, t_j, t_a, t_v);
    const double dir = dist >= 0 ? 1.0 : -1.0;
    if (4.0 * t_j + 2.0 * t_a + t_v > 0.0) {
      ax.move = {{t_j, dir * j}, {t_a, 0.0},      {t_j, -dir * j},
                 {t_v, 0.0},     {t_j, -dir * j}, {t_a, 0.0},
                 {t_j, dir * j}};
    }
    ax.move_time = 4.0 * t_j + 2.0 * t_a + t_v;
    traj.move_duration_ = std::max(traj.move_duration_, ax.move_time);
  }
  for (int k = 0; k < 3; ++k) {
    Axis& ax = traj.axes_[k];
    ax.time_scale =
        (traj.move_duration_ > 0.0 && ax.move_time > 0.0)
            ? ax.move_time / traj.move_duration_
            : 1.0;
  }
  traj.target_ = PlatformPose(
      Vec3(traj.axes_[0].p_end, traj.axes_[1].p_end, traj.axes_[2].p_end));
  return traj;
}

DesiredState JerkLimitedTrajectory::sample(double t) const {
  t = std::clamp(t, 0.0, duration());
  Vec3 p, v, a;
  for (int k = 0; k < 3; ++k) {
    const Axis& ax = axes_[k];
    if (t < ax.stop_time) {
      eval_segments(ax.stop, ax.p0, ax.v0, ax.a0, t, p[k], v[k], a[k]);
      continue;
    }
    const double t_move = t - stop_duration_;
    if (t_move <= 0.0 || ax.move.empty()) {
      p[k] = ax.p_rest;
      v[k] = 0.0;
      a[k] = 0.0;
      continue;
    }
    if (t_move >= move_duration_) {
      p[k] = ax.p_end;
      v[k] = 0.0;
      a[k] = 0.0;
      continue;
    }
    const double alpha = ax.time_scale;
    eval_segments(ax.move, ax.p_rest, 0.0, 0.0, t_move * alpha, p[k], v[k],
                  a[k]);
    v[k] *= alpha;
    a[k] *= alpha * alpha;
  }
  DesiredState out;
  out.pose = PlatformPose(p);
  out.vel = v;
  out.acc = a;
  return out;
}

std::vector<DesiredState> JerkLimitedTrajectory::sample_series(double dt) const {
  if (dt <= 0.0) throw ConfigError("sample spacing must be positive");
  std::vector<DesiredState> out;
  const double total = duration();
  const int n = static_cast<int>(std::ceil(total / dt - 1e-12));
  out.reserve(n + 2);
  for (int k = 0; k <= n; ++k) out.push_back(sample(std::min(k * dt, total)));
  if (n * dt < total - 1e-12) out.push_back(sample(total));
  return out;
}

}  // namespace prsim
