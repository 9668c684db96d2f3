#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "prsim/sim.hpp"
#include "support.hpp"

using namespace prsim;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario collision_scenario(const std::string& strategy = "rm",
                            double duration = 1.2) {
  std::ostringstream yaml;
  yaml << R"(
initial_pose: {x: 0.0, y: 0.0, phi_deg: 0.0}
task:
  target: {x: 0.09, y: 0.0, phi_deg: 0.0}
  v_max: 0.25
  a_max: 5.0
  j_max: 100.0
contact:
  type: collision
  location: {chain: 1, body: platform, s: 0.5}
  stiffness: 1.0e4
  damping: 50.0
  engage: {time: 0.28}
planner:
  strategy: )"
       << strategy << R"(
  eps_r: [10.0, 10.0, 1.0]
  eps_g_factor: 4.0
sim:
  dt: 0.001
  duration: )"
       << duration << R"(
  seed: 42
)";
  return parse_scenario(yaml.str());
}

}  // namespace

TEST_CASE("contact model: separation, static penetration, clamp force pair") {
  const RobotGeometry geom = RobotGeometry::symmetric();
  const PlatformPose pose;
  const JointConfig q = inverse_kinematics(geom, pose, {+1, +1, +1});

  ResolvedContact rc;
  rc.type = ContactSpec::Type::Collision;
  rc.location = {0, ContactLocation::Body::Platform, 0.5};
  const Vec2 p = contact_point(geom, q, rc.location);

  SUBCASE("separated: zero force") {
    rc.obstacle = {p + Vec2(0.01, 0.0), Vec2(-1.0, 0.0), 1e4, 50.0};
    const ContactForces cf = step_contact_model(rc, geom, q, pose, Vec3::Zero());
    CHECK(cf.magnitude == 0.0);
    CHECK(cf.points.empty());
    CHECK(cf.platform_wrench.norm() == 0.0);
  }

  SUBCASE("static penetration delta gives k*delta along the normal") {
    const double delta = 2e-3;
    rc.obstacle = {p - Vec2(delta, 0.0), Vec2(-1.0, 0.0), 1e4, 50.0};
    const ContactForces cf = step_contact_model(rc, geom, q, pose, Vec3::Zero());
    CHECK(cf.magnitude == doctest::Approx(1e4 * delta).epsilon(1e-12));
    REQUIRE(cf.points.size() == 1);
    CHECK((cf.points[0].force - Vec2(-1e4 * delta, 0.0)).norm() < 1e-9);
  }

  SUBCASE("damping never makes the contact adhesive") {
    const double delta = 1e-4;
    rc.obstacle = {p - Vec2(delta, 0.0), Vec2(-1.0, 0.0), 1e4, 50.0};
    // Separating fast: spring force overwhelmed by damping -> clamped to 0.
    const ContactForces cf =
        step_contact_model(rc, geom, q, pose, Vec3(-1.0, 0.0, 0.0));
    CHECK(cf.magnitude == 0.0);
  }

  SUBCASE("clamp applies equal and opposite link forces") {
    ResolvedContact clamp;
    clamp.type = ContactSpec::Type::Clamping;
    clamp.clamp = {1, 0.75, 0.25, 0.0, 1e4, 50.0};
    const Vec2 p1 =
        contact_point(geom, q, {1, ContactLocation::Body::Link1, 0.75});
    const Vec2 p2 =
        contact_point(geom, q, {1, ContactLocation::Body::Link2, 0.25});
    clamp.clamp.object_size = (p1 - p2).norm() + 1.5e-3;  // squeezed by 1.5 mm
    const ContactForces cf =
        step_contact_model(clamp, geom, q, pose, Vec3::Zero());
    REQUIRE(cf.points.size() == 2);
    CHECK((cf.points[0].force + cf.points[1].force).norm() < 1e-12);
    CHECK(cf.magnitude == doctest::Approx(1e4 * 1.5e-3).epsilon(1e-9));
    // Wrench equals the sum of the two projections.
    const auto pr1 = project_link_force(geom, q, pose, cf.points[0].loc,
                                        cf.points[0].force);
    const auto pr2 = project_link_force(geom, q, pose, cf.points[1].loc,
                                        cf.points[1].force);
    CHECK((cf.platform_wrench - pr1.platform - pr2.platform)
              .lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("deep-contact energy audit: the obstacle only stores or dissipates") {
  // Push the platform into an obstacle and retreat; the work done on the
  // obstacle minus the stored spring energy must never go negative.
  Scenario sc = collision_scenario("none", 1.0);
  const ResolvedContact rc = resolve_contact(sc);
  const RunResult rr = run_scenario(sc);
  double work_on_obstacle = 0.0;
  double worst = 0.0;
  for (const auto& row : rr.trace) {
    // Power delivered to the obstacle = -F_on_robot . v_platform_point.
    work_on_obstacle += -row.f_ext_true.dot(row.xdot) * sc.dt;
    const JointConfig q =
        inverse_kinematics(sc.model.geom, PlatformPose(row.x), sc.branch);
    const Vec2 p = contact_point(sc.model.geom, q, rc.location);
    const double gap = rc.obstacle.normal.dot(p - rc.obstacle.point);
    const double stored =
        gap < 0.0 ? 0.5 * rc.obstacle.stiffness * gap * gap : 0.0;
    worst = std::min(worst, work_on_obstacle - stored);
  }
  CHECK(worst > -1e-4);
  CHECK(rr.summary.f_contact_max > 5.0);
}

TEST_CASE("no-contact scenario stays in mode None with zero contact force") {
  const Scenario sc = parse_scenario(R"(
initial_pose: {x: 0.0, y: 0.0, phi_deg: 0.0}
task:
  target: {x: 0.05, y: 0.02, phi_deg: 5.0}
  v_max: 0.2
sim: {dt: 0.001, duration: 0.8, seed: 7}
)");
  const RunResult rr = run_scenario(sc);
  CHECK_FALSE(rr.summary.detected);
  for (const auto& row : rr.trace) {
    CHECK(row.mode == 0);
    CHECK(row.f_contact == 0.0);
  }
  // The task is tracked: final pose close to the target.
  CHECK((rr.trace.back().x - sc.task.target.vec()).norm() < 2e-3);
  CHECK(rr.summary.constraint_residual_max < 1e-8);
}

TEST_CASE("scenario parsing: units, defaults and validation errors") {
  const Scenario sc = collision_scenario();
  CHECK(sc.planner.d_react == doctest::Approx(0.05));
  CHECK(sc.planner.thresholds.eps_g.x() == doctest::Approx(40.0));
  CHECK(sc.impedance.stiffness.x() == doctest::Approx(2000.0));
  CHECK(sc.contact.stiffness == doctest::Approx(1e4));

  CHECK_THROWS_AS(parse_scenario("planner: {strategy: bogus}"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("sim: {dt: -0.001}"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(R"(
planner:
  eps_r: [10, 10, 1]
  eps_g: [5, 40, 4]
)"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario("contact: {type: collision, location: "
                                 "{chain: 7, body: platform}}"),
                  ConfigError);
}

TEST_CASE("collision with retraction: detection, same-step reaction, termination") {
  const Scenario sc = collision_scenario("rm");
  const RunResult rr = run_scenario(sc);
  REQUIRE(rr.summary.detected);
  REQUIRE(rr.summary.terminated);
  CHECK(rr.summary.f_contact_max > 10.0);

  // The reaction is planned in the same control step the threshold fires.
  const auto& trace = rr.trace;
  std::size_t first = 0;
  while (trace[first].mode == 0) ++first;
  REQUIRE(first > 0);
  const auto exceeded = [&](const TraceRow& row) {
    return (row.f_ext_hat.cwiseAbs().array() >=
            sc.planner.thresholds.eps_r.array())
        .any();
  };
  CHECK(exceeded(trace[first]));
  CHECK_FALSE(exceeded(trace[first - 1]));

  // Termination within the reaction window and contact stays off afterwards.
  CHECK(rr.summary.termination_time > rr.summary.detection_time);
  CHECK(rr.summary.termination_time - rr.summary.detection_time < 0.2);
}

TEST_CASE("identical seeds give bit-identical traces") {
  const Scenario sc = [] {
    Scenario s = collision_scenario("full", 0.8);
    s.noise.xdot_std = 1e-4;  // exercise the RNG path too
    s.noise.tau_std = 0.02;
    return s;
  }();
  const RunResult a = run_scenario(sc);
  const RunResult b = run_scenario(sc);
  const std::string pa = temp_path("prsim_trace_a.csv");
  const std::string pb = temp_path("prsim_trace_b.csv");
  write_trace_csv(pa, a.trace);
  write_trace_csv(pb, b.trace);
  CHECK(slurp(pa) == slurp(pb));
  CHECK(slurp(pa).size() > 10000);
}

TEST_CASE("observer tracks the true wrench in quasi-static pressing") {
  Scenario sc = collision_scenario("none", 2.5);
  const RunResult rr = run_scenario(sc);
  // At the end of the run the press is quasi-static.
  const TraceRow& last = rr.trace.back();
  CHECK(last.f_contact > 10.0);
  CHECK((last.f_ext_hat - last.f_ext_true).norm() <
        0.02 * last.f_ext_true.norm() + 0.5);
}

TEST_CASE("single-point sweep equals a plain run") {
  const Scenario sc = collision_scenario("rm");
  const auto rows = sweep(sc, SweepAxis::Velocity, {sc.task.limits.v_max});
  REQUIRE(rows.size() == 1);
  const RunResult direct = run_scenario(sc);
  CHECK(rows[0].summary.detection_time == direct.summary.detection_time);
  CHECK(rows[0].summary.termination_time == direct.summary.termination_time);
  CHECK(rows[0].summary.f_contact_max == direct.summary.f_contact_max);
}

TEST_CASE("dataset generation gates samples and labels them by ground truth") {
  DatasetMatrixSpec spec;
  spec.configurations = {PlatformPose{Vec2(0.0, 0.0), 0.0}};
  spec.duration = 1.6;
  spec.engage_time = 0.4;
  spec.approach_speed = 0.08;
  spec.seed = 5;
  const ContactDataset ds = generate_dataset(spec, 2);
  REQUIRE(ds.size() > 1000);
  int clamp_rows = 0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const Wrench w(ds.features(i, 0), ds.features(i, 1), ds.features(i, 2));
    CHECK((w.cwiseAbs().array() >= spec.eps_r.array()).any());
    CHECK(ds.features.row(i).tail<3>().minCoeff() >= 0.0);
    CHECK(ds.config_id[i] == 0);
    // Case index encodes the ground-truth label.
    if (ds.scenario_id[i] >= 7)
      CHECK(ds.label[i] == ds.scenario_id[i] - 6);
    else
      CHECK(ds.label[i] == 0);
    if (ds.label[i] > 0) ++clamp_rows;
  }
  CHECK(clamp_rows > 100);

  // CSV round trip preserves every field.
  const std::string path = temp_path("prsim_dataset.csv");
  ds.save_csv(path);
  const ContactDataset loaded = ContactDataset::load_csv(path);
  REQUIRE(loaded.size() == ds.size());
  CHECK((loaded.features - ds.features).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((loaded.label - ds.label).lpNorm<Eigen::Infinity>() == 0);
}

TEST_CASE("balanced undersampling equalizes class counts deterministically") {
  Eigen::VectorXi labels(10);
  labels << 0, 0, 0, 0, 0, 0, 0, 1, 1, 2;
  const auto idx = balanced_indices(labels, 3);
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(3);
  for (auto i : idx) ++counts[labels[i]];
  CHECK(counts[0] == 1);
  CHECK(counts[1] == 1);
  CHECK(counts[2] == 1);
  CHECK(balanced_indices(labels, 3) == idx);
}
