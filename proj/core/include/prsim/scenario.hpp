/**
 * @file scenario.hpp
 * @brief Scenario configuration for closed-loop runs.
 *
 * Scenarios are described by one YAML file; mixed input units (N/mm,
 * degrees, mm) are converted to SI at parse time. See the README for the
 * schema.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "prsim/control.hpp"
#include "prsim/dynamics.hpp"
#include "prsim/planner.hpp"
#include "prsim/types.hpp"

namespace prsim {

/// Collision obstacle: a half-plane with a unilateral spring-damper surface.
struct ObstacleSpec {
  Vec2 point = Vec2::Zero();   // a point on the surface [m]
  Vec2 normal = Vec2::UnitX(); // unit normal, pointing toward free space
  double stiffness = 1e4;      // [N/m]
  double damping = 50.0;       // [N s/m]
};

/// Clamp: an object of size `object_size` squeezed between a point on link 1
/// and a point on link 2 of one chain.
struct ClampSpec {
  int chain = 0;
  double s1 = 0.7;          // arc fraction on link 1
  double s2 = 0.3;          // arc fraction on link 2
  double object_size = 0.0; // rest distance [m]; 0 requests auto placement
  double stiffness = 1e4;
  double damping = 50.0;
};

struct ContactSpec {
  enum class Type { None, Collision, Clamping };
  Type type = Type::None;

  // Collision: the struck body point; obstacle placed explicitly or by a
  // kinematic dry run of the task trajectory at `engage_time`.
  ContactLocation location;
  std::optional<ObstacleSpec> obstacle;  // explicit placement
  double engage_time = 0.3;              // [s] auto placement instant
  double engage_offset = 0.0;            // extra surface offset [m]
  double stiffness = 1e4;
  double damping = 50.0;

  ClampSpec clamp;  // used when type == Clamping
};

struct TaskSpec {
  PlatformPose target;
  MotionLimits limits{0.25, 5.0, 100.0};
  double hold = 1.0;  // seconds to hold the target after the move
  // Smooth pseudo-random wander around the held target to diversify contact
  // forces during dataset generation.
  double dither_amp_t = 0.0;  // [m]
  double dither_amp_r = 0.0;  // [rad]
  double dither_freq = 1.1;   // base frequency [Hz]
};

struct NoiseSpec {
  double xdot_std = 0.0;  // per-component on measured xdot
  double tau_std = 0.0;   // per-drive on the torques fed to the observer [N m]
};

struct Scenario {
  RobotModel model = RobotModel::standard();
  std::array<int, kNumChains> branch{+1, +1, +1};
  PlatformPose initial_pose;
  TaskSpec task;
  ContactSpec contact;
  ImpedanceConfig impedance;
  Vec3 observer_gain = Vec3::Constant(20.0);  // K_o diagonal [1/s]
  PlannerConfig planner;
  NoiseSpec noise;
  double dt = 1e-3;
  double duration = 1.5;
  Integrator integrator = Integrator::SemiImplicitEuler;
  std::uint64_t seed = 1;
  std::string contact_model_path;  // optional FNN-1 file
  std::string chain_model_path;    // optional FNN-2 file

  void validate() const;
};

/// Loads a scenario YAML file. Throws ConfigError on any schema violation.
Scenario load_scenario(const std::string& path);

/// Parses a scenario from YAML text (used by tests).
Scenario parse_scenario(const std::string& yaml_text);

/// Matrix specification for dataset generation: a set of robot
/// configurations crossed with the ten contact cases (platform collision,
/// six link collisions, three clampings).
struct DatasetMatrixSpec {
  std::vector<PlatformPose> configurations;
  double approach_speed = 0.08;   // [m/s]
  double duration = 4.0;          // per scenario [s]
  double engage_time = 0.5;       // [s]
  TaskSpec dither_template;       // dither amplitudes/frequency reused per run
  NoiseSpec noise;
  Vec3 eps_r = Vec3(10.0, 10.0, 1.0);  // gating thresholds
  double f_min = 1.0;
  double obstacle_stiffness = 1e4;
  double obstacle_damping = 50.0;
  std::uint64_t seed = 1;
  RobotModel model = RobotModel::standard();
  std::array<int, kNumChains> branch{+1, +1, +1};
};

DatasetMatrixSpec load_dataset_matrix(const std::string& path);
DatasetMatrixSpec parse_dataset_matrix(const std::string& yaml_text);

}  // namespace prsim
