/**
 * @file planner.hpp
 * @brief Reactive motion planner: threshold gating, retraction, structure
 *        opening and the zero-g fallback.
 *
 * Per control step the planner inspects the estimated wrench:
 *   - any |F^_ext,j| >= eps_g,j  -> zero-g mode (gravity compensation only,
 *     desired pose held at the current actual pose);
 *   - else any |F^_ext,j| >= eps_r,j -> line of action, retraction target
 *     x~_t,d = x_t + d_react n^_f, chain features d, contact classification;
 *     a clamping verdict adds the structure opening
 *     x~_r,d = x_r - sgn(dq_p,i/dx_r) |gamma|; translational stiffness is
 *     lowered for the reaction;
 *   - else the preplanned trajectory continues.
 * Reaction trajectories are jerk-limited and start from the current desired
 * state (optionally from the actual state). Once reacting, new eps_r
 * crossings do not replan; only an eps_g crossing escalates to zero-g.
 */
#pragma once

#include <optional>

#include "prsim/classifier.hpp"
#include "prsim/contact_geometry.hpp"
#include "prsim/scurve.hpp"
#include "prsim/types.hpp"

namespace prsim {

struct ReactionThresholds {
  Vec3 eps_r = Vec3(10.0, 10.0, 1.0);  // reaction [N, N, N m]
  Vec3 eps_g = Vec3(40.0, 40.0, 4.0);  // zero-g fallback

  void validate() const {
    if ((eps_r.array() <= 0.0).any() ||
        (eps_g.array() <= eps_r.array()).any())
      throw ConfigError("thresholds must satisfy 0 < eps_r < eps_g");
  }

  bool reaction_exceeded(const Wrench& f) const {
    return (f.cwiseAbs().array() >= eps_r.array()).any();
  }
  bool zero_g_exceeded(const Wrench& f) const {
    return (f.cwiseAbs().array() >= eps_g.array()).any();
  }
};

enum class ReactionMode {
  None = 0,
  Retraction = 1,
  RetractionPlusOpening = 2,
  StructureOpening = 3,
  ZeroG = 4,
};

/// Which reactions the planner is allowed to take. `Full` runs the complete
/// pipeline with the classifiers; the others force a fixed reaction for the
/// experiment comparisons. `ZeroGOnly` reacts only at the upper threshold.
enum class ReactionStrategy {
  NoReaction,
  ZeroGOnly,
  Retraction,
  Opening,
  RetractionPlusOpening,
  Full,
};

struct PlannerConfig {
  ReactionThresholds thresholds;
  double d_react = 0.05;                   // [m]
  double gamma_abs = 5.0 * M_PI / 180.0;   // [rad]
  MotionLimits limits{0.5, 10.0, 200.0};   // reaction trajectory limits
  double f_min = 1.0;                      // LoA validity gate [N]
  bool start_from_actual = false;
  ReactionStrategy strategy = ReactionStrategy::Full;
};

struct ReactionPlan {
  ReactionMode mode = ReactionMode::None;
  bool replanned = false;           // a new trajectory was produced this step
  PlatformPose target;              // x~_d, valid when replanned
  JerkLimitedTrajectory trajectory; // valid when replanned and mode != ZeroG
  int clamped_chain = -1;           // 0-based, set when opening
  Vec3 min_dist = Vec3::Constant(-1.0);  // feature d when computed
};

/// Retraction target x~_t,d = x_t + d_react n^_f (Cartesian part only).
Vec2 retraction_target(const Vec2& x_t, const LineOfAction& loa,
                       double d_react);

/// Structure-opening orientation target
/// x~_r,d = x_r - sgn(dq_p,i/dx_r) |gamma| for the planar robot.
/// Throws SingularJacobian / DegenerateGradient.
double opening_target(const RobotGeometry& geom, const JointConfig& q,
                      const PlatformPose& x, int chain, double gamma_abs);

class ReactivePlanner {
 public:
  ReactivePlanner(PlannerConfig config, const RobotGeometry* geom)
      : cfg_(std::move(config)), geom_(geom) {
    cfg_.thresholds.validate();
    cfg_.limits.validate();
  }

  /// Optional classifiers. Without a contact model the full strategy treats
  /// every reaction as a collision; without a chain model the opening chain
  /// falls back to the argmin of the distance feature.
  void attach_classifiers(const FnnModel* contact, const FnnModel* chain) {
    fnn_contact_ = contact;
    fnn_chain_ = chain;
  }

  /// One planning step, executed in the same control period as detection.
  /// `desired` is the currently tracked desired state (used as the reaction
  /// trajectory start unless start_from_actual is set).
  ReactionPlan step(const Wrench& f_ext_hat, const JointConfig& q,
                    const PlatformPose& x, const Vec3& xdot,
                    const DesiredState& desired);

  ReactionMode mode() const { return mode_; }
  const PlannerConfig& config() const { return cfg_; }
  void reset() { mode_ = ReactionMode::None; }

 private:
  ReactionPlan plan_reaction(const Wrench& f_ext_hat, const JointConfig& q,
                             const PlatformPose& x, const Vec3& xdot,
                             const DesiredState& desired);
  ReactionPlan zero_g(const PlatformPose& x);

  PlannerConfig cfg_;
  const RobotGeometry* geom_;
  const FnnModel* fnn_contact_ = nullptr;
  const FnnModel* fnn_chain_ = nullptr;
  ReactionMode mode_ = ReactionMode::None;
};

}  // namespace prsim
