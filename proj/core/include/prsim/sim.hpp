/**
 * @file sim.hpp
 * @brief Closed-loop scenario engine: penalty contact models, the 1 kHz loop
 *        (plant -> observer -> planner -> controller), sweeps and dataset
 *        generation.
 */
#pragma once

#include <string>
#include <vector>

#include "prsim/dataset.hpp"
#include "prsim/observer.hpp"
#include "prsim/planner.hpp"
#include "prsim/scenario.hpp"

namespace prsim {

/// Contact spec after automatic placement (obstacle pose / clamp size fixed).
struct ResolvedContact {
  ContactSpec::Type type = ContactSpec::Type::None;
  ContactLocation location;  // collision body point
  ObstacleSpec obstacle;
  ClampSpec clamp;
};

struct PointForce {
  ContactLocation loc;
  Vec2 force = Vec2::Zero();
};

struct ContactForces {
  std::vector<PointForce> points;          // at most two
  Wrench platform_wrench = Wrench::Zero(); // sum of J_xCx^T f projections
  double magnitude = 0.0;                  // scalar contact force f_C >= 0
};

/// Unilateral spring-damper penalty forces for the current plant state.
/// Collision: normal force on the struck body point, zero when separated,
/// never adhesive. Clamping: two opposing forces on the link pair points.
ContactForces step_contact_model(const ResolvedContact& contact,
                                 const RobotGeometry& geom,
                                 const JointConfig& q, const PlatformPose& x,
                                 const Vec3& xdot);

/// Places the obstacle (or sizes the clamp object) from a kinematic dry run
/// of the task trajectory, so first contact occurs near `engage_time`.
ResolvedContact resolve_contact(const Scenario& sc);

struct TraceRow {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 xdot = Vec3::Zero();
  Wrench f_motor = Wrench::Zero();
  double f_contact = 0.0;            // true contact force magnitude
  Wrench f_ext_true = Wrench::Zero(); // true platform wrench of the contact
  Wrench f_ext_hat = Wrench::Zero();
  int mode = 0;                      // ReactionMode
  Vec3 dmin = Vec3::Constant(-1.0);  // -1 when the LoA is invalid
};

struct RunSummary {
  bool detected = false;
  double detection_time = -1.0;
  bool terminated = false;
  double termination_time = -1.0;  // first sustained f_C = 0 after detection
  double f_contact_max = 0.0;
  double constraint_residual_max = 0.0;
};

struct RunResult {
  std::vector<TraceRow> trace;
  RunSummary summary;
};

RunResult run_scenario(const Scenario& sc);

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& trace);

/// Mode-transition events (t, from, to) extracted from a trace.
void write_events_csv(const std::string& path,
                      const std::vector<TraceRow>& trace);

struct SweepRow {
  double value;
  RunSummary summary;
};

enum class SweepAxis { Velocity, Stiffness };

/// One run per value: velocity overrides the task cruise speed [m/s],
/// stiffness the translational reaction stiffness [N/m].
std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis,
                            const std::vector<double>& values);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

/// Runs the full scenario matrix (configurations x ten contact cases:
/// platform collision, six link collisions, three clampings) and collects
/// the eps_r-gated samples. `jobs` > 1 runs scenarios concurrently; rows are
/// concatenated in scenario order either way.
ContactDataset generate_dataset(const DatasetMatrixSpec& spec, int jobs = 1);

/// The scenario executed for one (configuration, case) cell of the matrix;
/// cases 0..6 are collisions, 7..9 clampings at chains 1..3.
Scenario dataset_cell_scenario(const DatasetMatrixSpec& spec, int config_index,
                               int case_index);

}  // namespace prsim
