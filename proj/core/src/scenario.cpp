#include "prsim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace prsim {

namespace {

double deg2rad(double d) { return d * M_PI / 180.0; }

PlatformPose parse_pose(const YAML::Node& n) {
  PlatformPose p;
  if (!n) return p;
  p.t.x() = n["x"].as<double>(0.0);
  p.t.y() = n["y"].as<double>(0.0);
  p.r = wrap_angle(deg2rad(n["phi_deg"].as<double>(0.0)));
  return p;
}

Vec3 parse_vec3(const YAML::Node& n, const Vec3& fallback) {
  if (!n) return fallback;
  if (!n.IsSequence() || n.size() != 3)
    throw ConfigError("expected a 3-element sequence");
  return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
}

ContactLocation parse_location(const YAML::Node& n) {
  ContactLocation loc;
  if (!n) return loc;
  loc.chain = n["chain"].as<int>(1) - 1;
  if (loc.chain < 0 || loc.chain >= kNumChains)
    throw ConfigError("contact location chain must be 1..3");
  const std::string body = n["body"].as<std::string>("platform");
  if (body == "link1")
    loc.body = ContactLocation::Body::Link1;
  else if (body == "link2")
    loc.body = ContactLocation::Body::Link2;
  else if (body == "platform")
    loc.body = ContactLocation::Body::Platform;
  else
    throw ConfigError("contact body must be link1|link2|platform");
  loc.s = n["s"].as<double>(0.5);
  if (loc.s < 0.0 || loc.s > 1.0)
    throw ConfigError("contact arc position s must be in [0,1]");
  return loc;
}

MotionLimits parse_limits(const YAML::Node& n, MotionLimits def) {
  if (!n) return def;
  def.v_max = n["v_max"].as<double>(def.v_max);
  def.a_max = n["a_max"].as<double>(def.a_max);
  def.j_max = n["j_max"].as<double>(def.j_max);
  def.validate();
  return def;
}

ReactionStrategy parse_strategy(const std::string& s) {
  if (s == "none") return ReactionStrategy::NoReaction;
  if (s == "zg") return ReactionStrategy::ZeroGOnly;
  if (s == "rm") return ReactionStrategy::Retraction;
  if (s == "so") return ReactionStrategy::Opening;
  if (s == "rm+so") return ReactionStrategy::RetractionPlusOpening;
  if (s == "full") return ReactionStrategy::Full;
  throw ConfigError("unknown planner strategy: " + s);
}

RobotModel parse_model(const YAML::Node& root) {
  RobotModel model = RobotModel::standard();
  const YAML::Node n = root["robot"];
  if (!n || (n.IsScalar() && n.as<std::string>() == "default")) return model;
  if (const YAML::Node g = n["geometry"]) {
    for (int i = 0; i < kNumChains; ++i) {
      const YAML::Node c = g["chains"][i];
      if (!c) throw ConfigError("robot.geometry.chains needs 3 entries");
      model.geom.base_anchor[i] =
          Vec2(c["base"][0].as<double>(), c["base"][1].as<double>());
      model.geom.platform_anchor[i] =
          Vec2(c["platform"][0].as<double>(), c["platform"][1].as<double>());
      model.geom.link1_len[i] = c["l1"].as<double>();
      model.geom.link2_len[i] = c["l2"].as<double>();
    }
    model.dyn = DynamicsParams::defaults(model.geom);
  }
  if (const YAML::Node d = n["dynamics"]) {
    auto& dyn = model.dyn;
    if (d["platform_mass"]) dyn.platform_mass = d["platform_mass"].as<double>();
    if (d["platform_inertia"])
      dyn.platform_inertia = d["platform_inertia"].as<double>();
    for (int i = 0; i < kNumChains; ++i) {
      if (d["link_mass"]) {
        dyn.link1_mass[i] = d["link_mass"].as<double>();
        dyn.link2_mass[i] = d["link_mass"].as<double>();
      }
      if (d["viscous"]) dyn.drive_viscous[i] = d["viscous"].as<double>();
      if (d["coulomb"]) dyn.drive_coulomb[i] = d["coulomb"].as<double>();
    }
    if (d["gravity"])
      dyn.gravity = Vec2(d["gravity"][0].as<double>(),
                         d["gravity"][1].as<double>());
  }
  model.geom.validate();
  model.dyn.validate();
  return model;
}

Scenario parse_scenario_node(const YAML::Node& root) {
  Scenario sc;
  sc.model = parse_model(root);

  if (const YAML::Node b = root["branch"]) {
    for (int i = 0; i < kNumChains; ++i) sc.branch[i] = b[i].as<int>() >= 0 ? 1 : -1;
  }
  sc.initial_pose = parse_pose(root["initial_pose"]);

  if (const YAML::Node t = root["task"]) {
    sc.task.target = parse_pose(t["target"]);
    sc.task.limits = parse_limits(t, sc.task.limits);
    sc.task.hold = t["hold"].as<double>(sc.task.hold);
    if (const YAML::Node d = t["dither"]) {
      sc.task.dither_amp_t = d["amplitude_t"].as<double>(0.0);
      sc.task.dither_amp_r = d["amplitude_r"].as<double>(0.0);
      sc.task.dither_freq = d["base_freq"].as<double>(1.1);
    }
  } else {
    sc.task.target = sc.initial_pose;
  }

  if (const YAML::Node c = root["contact"]) {
    const std::string type = c["type"].as<std::string>("none");
    if (type == "none") {
      sc.contact.type = ContactSpec::Type::None;
    } else if (type == "collision") {
      sc.contact.type = ContactSpec::Type::Collision;
      sc.contact.location = parse_location(c["location"]);
      sc.contact.stiffness = c["stiffness"].as<double>(1e4);
      sc.contact.damping = c["damping"].as<double>(50.0);
      if (const YAML::Node o = c["obstacle"]) {
        ObstacleSpec obs;
        obs.point = Vec2(o["px"].as<double>(), o["py"].as<double>());
        obs.normal =
            Vec2(o["nx"].as<double>(), o["ny"].as<double>()).normalized();
        obs.stiffness = sc.contact.stiffness;
        obs.damping = sc.contact.damping;
        sc.contact.obstacle = obs;
      } else if (const YAML::Node e = c["engage"]) {
        sc.contact.engage_time = e["time"].as<double>(0.3);
        sc.contact.engage_offset = e["offset"].as<double>(0.0);
      }
    } else if (type == "clamping") {
      sc.contact.type = ContactSpec::Type::Clamping;
      const YAML::Node cl = c["clamp"];
      if (!cl) throw ConfigError("clamping contact requires a clamp section");
      sc.contact.clamp.chain = cl["chain"].as<int>(1) - 1;
      if (sc.contact.clamp.chain < 0 || sc.contact.clamp.chain >= kNumChains)
        throw ConfigError("clamp chain must be 1..3");
      sc.contact.clamp.s1 = cl["s1"].as<double>(0.7);
      sc.contact.clamp.s2 = cl["s2"].as<double>(0.3);
      sc.contact.clamp.object_size = cl["object_size"].as<double>(0.0);
      sc.contact.clamp.stiffness = cl["stiffness"].as<double>(1e4);
      sc.contact.clamp.damping = cl["damping"].as<double>(50.0);
      sc.contact.engage_time = cl["engage_time"].as<double>(0.3);
    } else {
      throw ConfigError("contact type must be none|collision|clamping");
    }
  }

  if (const YAML::Node n = root["controller"]) {
    const double kt = n["kt"].as<double>(2.0) * 1e3;  // N/mm -> N/m
    const double kr = n["kr"].as<double>(85.0);
    sc.impedance.stiffness = Vec3(kt, kt, kr);
    sc.impedance.damping_ratio = parse_vec3(n["dxi"], Vec3::Ones());
    sc.impedance.reaction_stiffness_t = n["reaction_kt"].as<double>(
        sc.impedance.stiffness.x() / 1e3) * 1e3;
    if (n["torque_limit"])
      sc.impedance.torque_limit = n["torque_limit"].as<double>();
    sc.impedance.validate();
  }

  if (const YAML::Node n = root["observer"]) {
    const double ko = n["ko"].as<double>(20.0);
    sc.observer_gain = parse_vec3(n["ko_diag"], Vec3::Constant(ko));
    if ((sc.observer_gain.array() <= 0.0).any())
      throw ConfigError("observer gains must be positive");
  }

  if (const YAML::Node n = root["planner"]) {
    sc.planner.strategy = parse_strategy(n["strategy"].as<std::string>("full"));
    sc.planner.thresholds.eps_r =
        parse_vec3(n["eps_r"], sc.planner.thresholds.eps_r);
    if (n["eps_g"]) {
      sc.planner.thresholds.eps_g = parse_vec3(n["eps_g"], Vec3::Zero());
    } else {
      const double f = n["eps_g_factor"].as<double>(4.0);
      sc.planner.thresholds.eps_g = f * sc.planner.thresholds.eps_r;
    }
    sc.planner.thresholds.validate();
    sc.planner.d_react = n["d_react_mm"].as<double>(50.0) * 1e-3;
    sc.planner.gamma_abs = deg2rad(n["gamma_deg"].as<double>(5.0));
    sc.planner.limits = parse_limits(n, sc.planner.limits);
    sc.planner.f_min = n["f_min"].as<double>(1.0);
    sc.planner.start_from_actual = n["start_from_actual"].as<bool>(false);
  }

  if (const YAML::Node n = root["noise"]) {
    sc.noise.xdot_std = n["xdot_std"].as<double>(0.0);
    sc.noise.tau_std = n["tau_std"].as<double>(0.0);
  }

  if (const YAML::Node n = root["sim"]) {
    sc.dt = n["dt"].as<double>(1e-3);
    sc.duration = n["duration"].as<double>(1.5);
    const std::string integ = n["integrator"].as<std::string>("semi_implicit");
    if (integ == "semi_implicit")
      sc.integrator = Integrator::SemiImplicitEuler;
    else if (integ == "rk4")
      sc.integrator = Integrator::RK4;
    else
      throw ConfigError("integrator must be semi_implicit|rk4");
    sc.seed = n["seed"].as<std::uint64_t>(1);
  }

  if (const YAML::Node n = root["models"]) {
    sc.contact_model_path = n["contact"].as<std::string>("");
    sc.chain_model_path = n["chain"].as<std::string>("");
  }

  sc.validate();
  return sc;
}

}  // namespace

void Scenario::validate() const {
  model.geom.validate();
  model.dyn.validate();
  if (dt <= 0.0 || duration <= 0.0)
    throw ConfigError("sim dt and duration must be positive");
  task.limits.validate();
  planner.thresholds.validate();
  planner.limits.validate();
  impedance.validate();
  if (contact.type == ContactSpec::Type::Collision && contact.stiffness <= 0.0)
    throw ConfigError("obstacle stiffness must be positive");
  if (contact.type == ContactSpec::Type::Clamping &&
      contact.clamp.stiffness <= 0.0)
    throw ConfigError("clamp stiffness must be positive");
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

Scenario parse_scenario(const std::string& yaml_text) {
  try {
    return parse_scenario_node(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario YAML error: ") + e.what());
  }
}

DatasetMatrixSpec parse_dataset_matrix(const std::string& yaml_text) {
  try {
    const YAML::Node root = YAML::Load(yaml_text);
    DatasetMatrixSpec spec;
    const YAML::Node configs = root["configurations"];
    if (!configs || !configs.IsSequence() || configs.size() == 0)
      throw ConfigError("dataset matrix needs a configurations list");
    for (const auto& c : configs) spec.configurations.push_back(parse_pose(c));
    spec.approach_speed = root["approach_speed"].as<double>(0.08);
    spec.duration = root["duration"].as<double>(4.0);
    spec.engage_time = root["engage_time"].as<double>(0.5);
    if (const YAML::Node d = root["dither"]) {
      spec.dither_template.dither_amp_t = d["amplitude_t"].as<double>(0.0);
      spec.dither_template.dither_amp_r = d["amplitude_r"].as<double>(0.0);
      spec.dither_template.dither_freq = d["base_freq"].as<double>(1.1);
    }
    if (const YAML::Node n = root["noise"]) {
      spec.noise.xdot_std = n["xdot_std"].as<double>(0.0);
      spec.noise.tau_std = n["tau_std"].as<double>(0.0);
    }
    spec.eps_r = parse_vec3(root["eps_r"], spec.eps_r);
    spec.f_min = root["f_min"].as<double>(1.0);
    if (const YAML::Node o = root["obstacle"]) {
      spec.obstacle_stiffness = o["stiffness"].as<double>(1e4);
      spec.obstacle_damping = o["damping"].as<double>(50.0);
    }
    spec.seed = root["seed"].as<std::uint64_t>(1);
    return spec;
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("dataset matrix YAML error: ") + e.what());
  }
}

DatasetMatrixSpec load_dataset_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset matrix file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset_matrix(buf.str());
}

}  // namespace prsim
