/**
 * @file observer.hpp
 * @brief Generalized-momentum observer in operational space.
 *
 * The estimate follows
 *   F^_ext = K_o ( M^_x xdot - int_0^t (F_m - beta^ + F^_ext) dt ),
 *   beta^  = g^_x + F^_fr,x - C^_x^T xdot,
 * producing first-order, per-axis decoupled error dynamics
 *   K_o^{-1} dF^_ext/dt + F^_ext = F_ext.
 *
 * Discrete form: trapezoidal integration of beta^, exact integration of the
 * zero-order-held F_m and the previous estimate (explicit feedback). The
 * integral accumulator is initialized to the initial momentum so the
 * estimate starts at zero.
 */
#pragma once

#include "prsim/dynamics.hpp"
#include "prsim/types.hpp"

namespace prsim {

class MomentumObserver {
 public:
  /// `gains` is the K_o diagonal [1/s]; entries must be positive.
  explicit MomentumObserver(const Vec3& gains) : gains_(gains) {
    if ((gains.array() <= 0.0).any())
      throw ConfigError("observer gains must be positive");
  }

  /// Resets the accumulator to the momentum of the given state; the next
  /// estimate starts from zero.
  void reset(const DynamicsTerms& terms, const Vec3& xdot) {
    integral_ = terms.M * xdot;
    beta_prev_ = beta(terms, xdot);
    f_ext_hat_ = Wrench::Zero();
    initialized_ = true;
  }

  /// Advances the estimate by one control period. `f_motor_held` is the
  /// wrench that was applied over the elapsed interval (zero-order hold);
  /// `terms`/`xdot` are the model terms at the new measurement.
  Wrench step(const DynamicsTerms& terms, const Vec3& xdot,
              const Wrench& f_motor_held, double dt);

  const Wrench& estimate() const { return f_ext_hat_; }
  const Vec3& gains() const { return gains_; }
  bool initialized() const { return initialized_; }

 private:
  static Vec3 beta(const DynamicsTerms& terms, const Vec3& xdot) {
    return terms.g + terms.friction - terms.C.transpose() * xdot;
  }

  Vec3 gains_;
  Vec3 integral_ = Vec3::Zero();
  Vec3 beta_prev_ = Vec3::Zero();
  Wrench f_ext_hat_ = Wrench::Zero();
  bool initialized_ = false;
};

}  // namespace prsim
