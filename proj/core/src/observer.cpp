#include "prsim/observer.hpp"

namespace prsim {

Wrench MomentumObserver::step(const DynamicsTerms& terms, const Vec3& xdot,
                              const Wrench& f_motor_held, double dt) {
  if (dt <= 0.0) throw ConfigError("observer step requires dt > 0");
  if (!initialized_) {
    reset(terms, xdot);
    return f_ext_hat_;
  }
  const Vec3 beta_now = beta(terms, xdot);
  // F_m and the fed-back estimate are constant over the interval; beta varies
  // with the state and is integrated trapezoidally.
  integral_ += dt * (f_motor_held + f_ext_hat_) -
               0.5 * dt * (beta_now + beta_prev_);
  beta_prev_ = beta_now;
  f_ext_hat_ = gains_.asDiagonal() * (terms.M * xdot - integral_);
  if (!f_ext_hat_.allFinite())
    throw SimDiverged("momentum observer estimate became non-finite");
  return f_ext_hat_;
}

}  // namespace prsim
