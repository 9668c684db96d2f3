#include "prsim/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <random>

#include "prsim/contact_geometry.hpp"
#include "prsim/control.hpp"

namespace prsim {

namespace {

/// Smooth pseudo-random wander around the held task target; three harmonics
/// per axis with seeded phases and a soft ramp-in.
class DitherGenerator {
 public:
  DitherGenerator(const TaskSpec& task, std::uint64_t seed) {
    amp_ = Vec3(task.dither_amp_t, task.dither_amp_t, task.dither_amp_r);
    base_freq_ = task.dither_freq;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    for (auto& row : phases_)
      for (double& p : row) p = phase(rng);
  }

  bool active() const { return amp_.lpNorm<Eigen::Infinity>() > 0.0; }

  /// Offset, velocity and acceleration at time tau since the hold started.
  void sample(double tau, Vec3& pos, Vec3& vel, Vec3& acc) const {
    pos.setZero();
    vel.setZero();
    acc.setZero();
    if (!active() || tau <= 0.0) return;
    const double ramp_t = 0.4;
    const double u = tau / ramp_t;
    const double env = 1.0 - std::exp(-u * u);
    const double denv = (2.0 * u / ramp_t) * std::exp(-u * u);
    const double ddenv =
        (2.0 / (ramp_t * ramp_t)) * (1.0 - 2.0 * u * u) * std::exp(-u * u);
    for (int k = 0; k < 3; ++k) {
      double s = 0.0, ds = 0.0, dds = 0.0;
      for (int h = 0; h < 3; ++h) {
        const double w = 2.0 * M_PI * base_freq_ * (h + 1);
        const double arg = w * tau + phases_[k][h];
        const double a = amp_[k] / (h + 1.0);
        s += a * std::sin(arg);
        ds += a * w * std::cos(arg);
        dds -= a * w * w * std::sin(arg);
      }
      pos[k] = env * s;
      vel[k] = env * ds + denv * s;
      acc[k] = env * dds + 2.0 * denv * ds + ddenv * s;
    }
  }

 private:
  Vec3 amp_ = Vec3::Zero();
  double base_freq_ = 1.1;
  std::array<std::array<double, 3>, 3> phases_{};
};

int num_steps(const Scenario& sc) {
  return static_cast<int>(std::llround(sc.duration / sc.dt));
}

}  // namespace

RunResult run_scenario(const Scenario& sc) {
  sc.validate();
  const RobotModel& model = sc.model;
  const RobotGeometry& geom = model.geom;

  std::optional<FnnModel> fnn_contact, fnn_chain;
  if (!sc.contact_model_path.empty())
    fnn_contact = FnnModel::load(sc.contact_model_path);
  if (!sc.chain_model_path.empty())
    fnn_chain = FnnModel::load(sc.chain_model_path);

  const JerkLimitedTrajectory task = JerkLimitedTrajectory::plan(
      DesiredState{sc.initial_pose, Vec3::Zero(), Vec3::Zero()},
      sc.task.target, sc.task.limits);
  const DitherGenerator dither(sc.task, sc.seed ^ 0x9e3779b97f4a7c15ull);
  const ResolvedContact contact = resolve_contact(sc);

  ReactivePlanner planner(sc.planner, &geom);
  planner.attach_classifiers(fnn_contact ? &*fnn_contact : nullptr,
                             fnn_chain ? &*fnn_chain : nullptr);
  MomentumObserver observer(sc.observer_gain);

  std::mt19937_64 rng(sc.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto task_desired = [&](double t) {
    DesiredState des = task.sample(t);
    if (t > task.duration() && dither.active()) {
      Vec3 dp, dv, da;
      dither.sample(t - task.duration(), dp, dv, da);
      des.pose = PlatformPose(Vec3(des.pose.vec() + dp));
      des.vel += dv;
      des.acc += da;
    }
    return des;
  };

  PlatformState state{sc.initial_pose, Vec3::Zero()};
  Wrench f_m_prev = Wrench::Zero();
  std::optional<JerkLimitedTrajectory> reaction;
  double reaction_t0 = 0.0;

  RunResult result;
  const int steps = num_steps(sc);
  result.trace.reserve(steps);

  for (int k = 0; k < steps; ++k) {
    const double t = k * sc.dt;
    const PlatformPose& x = state.pose;
    const JointConfig q = inverse_kinematics(geom, x, sc.branch);

    // Measurement with optional sensor noise.
    Vec3 v_meas = state.vel;
    if (sc.noise.xdot_std > 0.0)
      for (int i = 0; i < 3; ++i) v_meas[i] += sc.noise.xdot_std * gauss(rng);

    const DynamicsTerms terms = compute_terms(model, q, x, v_meas);

    Wrench f_m_observed = f_m_prev;
    if (sc.noise.tau_std > 0.0) {
      const Mat9x3 j_qx = jacobian_q_x(geom, q, x);
      Mat3 j_qax;
      for (int i = 0; i < kNumChains; ++i) j_qax.row(i) = j_qx.row(3 * i);
      Vec3 eta;
      for (int i = 0; i < 3; ++i) eta[i] = sc.noise.tau_std * gauss(rng);
      f_m_observed += j_qax.transpose() * eta;
    }

    Wrench f_hat = Wrench::Zero();
    if (k == 0)
      observer.reset(terms, v_meas);
    else
      f_hat = observer.step(terms, v_meas, f_m_observed, sc.dt);

    DesiredState desired =
        reaction ? reaction->sample(t - reaction_t0) : task_desired(t);

    const ReactionPlan plan = planner.step(f_hat, q, x, v_meas, desired);
    if (plan.replanned) {
      if (plan.mode == ReactionMode::ZeroG) {
        reaction.reset();
      } else {
        reaction = plan.trajectory;
        reaction_t0 = t;
        desired = reaction->sample(0.0);
      }
    }
    const ReactionMode mode = planner.mode();

    // Trace features from the current estimate.
    TraceRow row;
    const LineOfAction loa = line_of_action(f_hat, sc.planner.f_min);
    if (loa.valid) row.dmin = min_distances(geom, q, loa);

    Wrench f_m;
    if (mode == ReactionMode::ZeroG) {
      f_m = terms.g;
    } else {
      Vec3 stiffness = sc.impedance.stiffness;
      if (mode != ReactionMode::None) {
        stiffness.x() = sc.impedance.reaction_stiffness_t;
        stiffness.y() = sc.impedance.reaction_stiffness_t;
      }
      f_m = control_force(model, sc.impedance, stiffness, terms, q, x, v_meas,
                          desired);
    }

    const ContactForces cf =
        step_contact_model(contact, geom, q, x, state.vel);

    row.t = t;
    row.x = x.vec();
    row.xdot = state.vel;
    row.f_motor = f_m;
    row.f_contact = cf.magnitude;
    row.f_ext_true = cf.platform_wrench;
    row.f_ext_hat = f_hat;
    row.mode = static_cast<int>(mode);
    result.trace.push_back(row);

    result.summary.constraint_residual_max =
        std::max(result.summary.constraint_residual_max,
                 constraints_residual(geom, q, x).lpNorm<Eigen::Infinity>());

    state = integrate_step(
        model, sc.branch, state, sc.dt,
        [&](const JointConfig& q2, const PlatformPose& x2, const Vec3& v2) {
          return Wrench(f_m + step_contact_model(contact, geom, q2, x2, v2)
                                  .platform_wrench);
        },
        sc.integrator);
    f_m_prev = f_m;
  }

  // Summary: detection and sustained-zero contact termination.
  auto& sum = result.summary;
  const int sustain = std::max(1, static_cast<int>(std::llround(0.010 / sc.dt)));
  int detect_idx = -1;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    sum.f_contact_max = std::max(sum.f_contact_max, result.trace[i].f_contact);
    if (detect_idx < 0 && result.trace[i].mode != 0) {
      detect_idx = static_cast<int>(i);
      sum.detected = true;
      sum.detection_time = result.trace[i].t;
    }
  }
  if (detect_idx >= 0) {
    int zero_run = 0;
    for (std::size_t i = detect_idx; i < result.trace.size(); ++i) {
      if (result.trace[i].f_contact <= 0.0) {
        if (++zero_run >= sustain) {
          sum.terminated = true;
          sum.termination_time = result.trace[i + 1 - zero_run].t;
          break;
        }
      } else {
        zero_run = 0;
      }
    }
  }
  return result;
}

namespace {

void put_num(std::ofstream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trace_csv(const std::string& path,
                     const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open trace file for writing: " + path);
  out << "t,x,y,phi,vx,vy,omega,fm_x,fm_y,fm_z,f_c,"
         "fext_x,fext_y,fext_z,fhat_x,fhat_y,fhat_z,mode,d1,d2,d3\n";
  for (const auto& r : trace) {
    put_num(out, r.t);
    for (int i = 0; i < 3; ++i) { out << ','; put_num(out, r.x[i]); }
    for (int i = 0; i < 3; ++i) { out << ','; put_num(out, r.xdot[i]); }
    for (int i = 0; i < 3; ++i) { out << ','; put_num(out, r.f_motor[i]); }
    out << ',';
    put_num(out, r.f_contact);
    for (int i = 0; i < 3; ++i) { out << ','; put_num(out, r.f_ext_true[i]); }
    for (int i = 0; i < 3; ++i) { out << ','; put_num(out, r.f_ext_hat[i]); }
    out << ',' << r.mode;
    for (int i = 0; i < 3; ++i) { out << ','; put_num(out, r.dmin[i]); }
    out << '\n';
  }
}

void write_events_csv(const std::string& path,
                      const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open events file for writing: " + path);
  out << "t,from_mode,to_mode\n";
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].mode != trace[i - 1].mode) {
      put_num(out, trace[i].t);
      out << ',' << trace[i - 1].mode << ',' << trace[i].mode << '\n';
    }
  }
}

std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis,
                            const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep requires at least one value");
  std::vector<SweepRow> rows;
  for (double value : values) {
    Scenario sc = base;
    if (axis == SweepAxis::Velocity)
      sc.task.limits.v_max = value;
    else
      sc.impedance.reaction_stiffness_t = value;
    rows.push_back({value, run_scenario(sc).summary});
  }
  return rows;
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open sweep file for writing: " + path);
  out << "value,detected,detection_time,terminated,termination_time,"
         "f_contact_max\n";
  for (const auto& r : rows) {
    put_num(out, r.value);
    out << ',' << (r.summary.detected ? 1 : 0) << ',';
    put_num(out, r.summary.detection_time);
    out << ',' << (r.summary.terminated ? 1 : 0) << ',';
    put_num(out, r.summary.termination_time);
    out << ',';
    put_num(out, r.summary.f_contact_max);
    out << '\n';
  }
}

Scenario dataset_cell_scenario(const DatasetMatrixSpec& spec, int config_index,
                               int case_index) {
  if (config_index < 0 ||
      config_index >= static_cast<int>(spec.configurations.size()))
    throw ConfigError("dataset config index out of range");
  if (case_index < 0 || case_index >= 10)
    throw ConfigError("dataset case index must be 0..9");

  Scenario sc;
  sc.model = spec.model;
  sc.branch = spec.branch;
  sc.initial_pose = spec.configurations[config_index];
  sc.noise = spec.noise;
  sc.duration = spec.duration;
  sc.planner.strategy = ReactionStrategy::NoReaction;
  sc.planner.thresholds.eps_r = spec.eps_r;
  sc.planner.thresholds.eps_g = 1e6 * Vec3::Ones();
  sc.planner.f_min = spec.f_min;
  sc.task.limits.v_max = spec.approach_speed;
  sc.task.hold = spec.duration;
  sc.task.dither_amp_t = spec.dither_template.dither_amp_t;
  sc.task.dither_amp_r = spec.dither_template.dither_amp_r;
  sc.task.dither_freq = spec.dither_template.dither_freq;
  sc.seed = spec.seed + 1000 * static_cast<std::uint64_t>(config_index) +
            static_cast<std::uint64_t>(case_index);

  const Vec2 x0 = sc.initial_pose.t;
  if (case_index <= 6) {
    // Collisions: platform, then link1/link2 of each chain. Sweep motion
    // directions around the circle for feature diversity.
    sc.contact.type = ContactSpec::Type::Collision;
    if (case_index == 0) {
      sc.contact.location = {0, ContactLocation::Body::Platform, 0.5};
    } else {
      const int chain = (case_index - 1) / 2;
      const bool first_link = (case_index - 1) % 2 == 0;
      sc.contact.location = {chain,
                             first_link ? ContactLocation::Body::Link1
                                        : ContactLocation::Body::Link2,
                             0.55};
    }
    const double angle = 2.0 * M_PI * case_index / 7.0 +
                         0.35 * static_cast<double>(config_index);
    sc.task.target = PlatformPose(x0 + 0.08 * unit_vec(angle),
                                  sc.initial_pose.r);
    sc.contact.engage_time = spec.engage_time;
    sc.contact.stiffness = spec.obstacle_stiffness;
    sc.contact.damping = spec.obstacle_damping;
  } else {
    // Clamping at chain (case - 7): fold the elbow by moving the platform
    // toward that chain's base anchor.
    const int chain = case_index - 7;
    sc.contact.type = ContactSpec::Type::Clamping;
    sc.contact.clamp.chain = chain;
    // Spanning points away from the elbow transmit a usable share of the
    // squeeze force to the platform (near the elbow the pair cancels).
    sc.contact.clamp.s1 = 0.4;
    sc.contact.clamp.s2 = 0.65;
    sc.contact.clamp.stiffness = spec.obstacle_stiffness;
    sc.contact.clamp.damping = spec.obstacle_damping;
    sc.contact.engage_time = spec.engage_time;
    const Vec2 dir = (sc.model.geom.base_anchor[chain] - x0).normalized();
    sc.task.target = PlatformPose(x0 + 0.06 * dir, sc.initial_pose.r);
  }
  return sc;
}

ContactDataset generate_dataset(const DatasetMatrixSpec& spec, int jobs) {
  const int num_configs = static_cast<int>(spec.configurations.size());
  const int total = num_configs * 10;

  auto run_cell = [&](int cell) {
    const int c = cell / 10, k = cell % 10;
    const Scenario sc = dataset_cell_scenario(spec, c, k);
    const RunResult rr = run_scenario(sc);
    ContactDataset ds;
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < rr.trace.size(); ++i) {
      const TraceRow& row = rr.trace[i];
      const bool gated =
          (row.f_ext_hat.cwiseAbs().array() >= spec.eps_r.array()).any();
      const bool loa_ok = row.dmin.minCoeff() >= 0.0;
      if (gated && loa_ok) keep.push_back(static_cast<Eigen::Index>(i));
    }
    ds.features.resize(static_cast<Eigen::Index>(keep.size()), 6);
    ds.label.resize(keep.size());
    ds.config_id.resize(keep.size());
    ds.scenario_id.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const TraceRow& row = rr.trace[keep[i]];
      ds.features.row(i) << row.f_ext_hat.x(), row.f_ext_hat.y(),
          row.f_ext_hat.z(), row.dmin.x(), row.dmin.y(), row.dmin.z();
      ds.label[i] = k <= 6 ? 0 : (k - 7 + 1);
      ds.config_id[i] = c;
      ds.scenario_id[i] = k;
    }
    return ds;
  };

  std::vector<ContactDataset> parts(total);
  if (jobs <= 1) {
    for (int cell = 0; cell < total; ++cell) parts[cell] = run_cell(cell);
  } else {
    std::atomic<int> next{0};
    std::vector<std::future<void>> futures;
    const int workers = std::min(jobs, total);
    for (int w = 0; w < workers; ++w)
      futures.push_back(std::async(std::launch::async, [&]() {
        for (int cell = next.fetch_add(1); cell < total;
             cell = next.fetch_add(1))
          parts[cell] = run_cell(cell);
      }));
    for (auto& f : futures) f.get();
  }

  ContactDataset all;
  for (const auto& part : parts) all.append_rows(part);
  return all;
}

}  // namespace prsim
