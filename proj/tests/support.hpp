// Shared test utilities: random consistent states, finite-difference
// oracles and a generic RK4 integrator kept independent of the library's
// simulation path.
#pragma once

#include <functional>
#include <random>

#include "prsim/kinematics.hpp"
#include "prsim/types.hpp"

namespace prsim::testing {

struct ConsistentState {
  JointConfig q;
  PlatformPose pose;
  Vec3 vel;
};

/// Uniform pose in a conservative patch of the workspace, joints by IK with
/// the default branch; rejects unreachable draws.
inline ConsistentState random_state(const RobotGeometry& geom,
                                    std::mt19937_64& rng,
                                    double pos_range = 0.10,
                                    double rot_range = 0.45,
                                    double vel_scale = 1.0) {
  std::uniform_real_distribution<double> upos(-pos_range, pos_range);
  std::uniform_real_distribution<double> urot(-rot_range, rot_range);
  std::normal_distribution<double> nvel(0.0, vel_scale);
  for (;;) {
    const PlatformPose pose{Vec2(upos(rng), upos(rng)), urot(rng)};
    try {
      ConsistentState s;
      s.pose = pose;
      s.q = inverse_kinematics(geom, pose, {+1, +1, +1});
      s.vel = Vec3(nvel(rng), nvel(rng), nvel(rng));
      return s;
    } catch (const Unreachable&) {
      continue;
    }
  }
}

/// Central finite difference of a vector function of a 3-vector.
template <typename F>
Eigen::MatrixXd fd_jacobian3(F&& f, const Vec3& at, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(at);
  Eigen::MatrixXd jac(f0.size(), 3);
  for (int k = 0; k < 3; ++k) {
    Vec3 p = at, m = at;
    p[k] += h;
    m[k] -= h;
    jac.col(k) = (f(p) - f(m)) / (2.0 * h);
  }
  return jac;
}

/// Generic fixed-step RK4 on y' = f(t, y) for test oracles.
inline Eigen::VectorXd rk4_integrate(
    const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& f,
    Eigen::VectorXd y, double t0, double t1, double dt) {
  double t = t0;
  while (t < t1 - 1e-12) {
    const double h = std::min(dt, t1 - t);
    const Eigen::VectorXd k1 = f(t, y);
    const Eigen::VectorXd k2 = f(t + h / 2, y + h / 2 * k1);
    const Eigen::VectorXd k3 = f(t + h / 2, y + h / 2 * k2);
    const Eigen::VectorXd k4 = f(t + h, y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return y;
}

}  // namespace prsim::testing
