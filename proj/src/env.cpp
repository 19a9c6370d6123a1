#include "mvrl/sim/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvrl::sim {

namespace {

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

void hash_double(uint64_t& h, double v) { h = fnv1a64(&v, sizeof(v), h); }

}  // namespace

uint64_t EnvState::hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  hash_double(h, effector.x());
  hash_double(h, effector.y());
  hash_double(h, effector.z());
  hash_double(h, object.x());
  hash_double(h, object.y());
  hash_double(h, object.z());
  hash_double(h, object_size);
  hash_double(h, table_height);
  const uint64_t tag = (uint64_t(grasped) << 32) | uint64_t(uint32_t(step_index));
  h = fnv1a64(&tag, sizeof(tag), h);
  return h;
}

ToyManipEnv::ToyManipEnv(EnvConfig config) : config_(std::move(config)) {
  if (config_.task != "reach" && config_.task != "lift")
    throw std::invalid_argument("unknown task: " + config_.task);
}

CameraPose ToyManipEnv::fixed_pose() const {
  return config_.fixed_pose ? *config_.fixed_pose : midpoint_camera_pose(config_.randomization);
}

MultiViewObservation ToyManipEnv::reset(const RandomizationSpec& spec, double magnitude,
                                        uint64_t seed) {
  if (magnitude < 0.0 || magnitude > 1.0)
    throw std::invalid_argument("reset: magnitude outside [0,1]");
  spec.validate();

  Rng rng(seed);
  state_ = EnvState{};
  state_.control_dt = spec.at("control_timestep").sample(rng, magnitude);
  const double delay_raw = spec.at("action_delay").sample(rng, magnitude);
  state_.action_delay = int(std::clamp(std::lround(delay_raw), 0l, 2l));
  const double damping = spec.at("joint_damping").sample(rng, magnitude);
  const double armature = spec.at("joint_armature").sample(rng, magnitude);
  state_.velocity_gain = (spec.at("joint_damping").center / damping) *
                         (spec.at("joint_armature").center / armature);
  state_.object_size = spec.at("object_size").sample(rng, magnitude);
  state_.table_height = spec.at("table_height").sample(rng, magnitude);

  moving_pose_ = sample_camera_pose(spec, rng, magnitude);

  const auto& th = config_.geometry.table_half;
  const double inset_x = th.x() - 0.10;
  const double inset_y = th.y() - 0.08;
  state_.object.x() = rng.uniform(-inset_x, inset_x);
  state_.object.y() = rng.uniform(-inset_y, inset_y);
  rest_object_z_ = state_.table_height + 0.5 * state_.object_size;
  state_.object.z() = rest_object_z_;

  // spawn the effector away from the target so no episode starts solved
  for (int tries = 0; tries < 64; ++tries) {
    state_.effector.x() = rng.uniform(-inset_x, inset_x);
    state_.effector.y() = rng.uniform(-inset_y, inset_y);
    if ((state_.effector.head<2>() - state_.object.head<2>()).norm() > 3.0 * config_.success_radius)
      break;
  }
  state_.effector.z() = config_.task == "lift" ? state_.table_height + 0.10 : rest_object_z_;

  state_.pending_actions.assign(size_t(state_.action_delay),
                                Eigen::VectorXd::Zero(config_.action_dim()));

  noise_rng_ = rng.fork(1);
  done_ = false;
  success_ = false;
  fixed_stack_.frames.clear();
  moving_stack_.frames.clear();
  return observe();
}

Eigen::Vector3d ToyManipEnv::target_point(const EnvState& state) const {
  return state.object;
}

double ToyManipEnv::shaped_reward(const EnvState& state) const {
  const double dist = (state.effector - target_point(state)).norm();
  const double approach = 1.0 - std::min(1.0, dist / config_.reach_scale);
  if (config_.task == "reach") return approach;
  // lift: approach, then hold, then raise
  const double height = state.object.z() - rest_object_z_;
  double r = 0.5 * approach;
  if (state.grasped) r += 0.5 + std::clamp(height / config_.lift_height, 0.0, 1.0);
  return r;
}

StepResult ToyManipEnv::step(const Eigen::VectorXd& action) {
  if (done_) throw std::logic_error("step called on a finished episode");
  if (action.size() != config_.action_dim())
    throw std::invalid_argument("action dimension mismatch");

  Eigen::VectorXd cmd = action;
  for (int i = 0; i < cmd.size(); ++i) cmd[i] = clamp_unit(cmd[i]);

  state_.pending_actions.push_back(cmd);
  const Eigen::VectorXd applied = state_.pending_actions.front();
  state_.pending_actions.pop_front();

  const double step_scale = config_.max_speed_mps * state_.control_dt * state_.velocity_gain;
  Eigen::Vector3d vel = Eigen::Vector3d::Zero();
  vel.x() = applied[0];
  vel.y() = applied[1];
  if (config_.task == "lift") vel.z() = applied[2];
  state_.effector += step_scale * vel;

  const auto& th = config_.geometry.table_half;
  state_.effector.x() = std::clamp(state_.effector.x(), -th.x() + 0.02, th.x() - 0.02);
  state_.effector.y() = std::clamp(state_.effector.y(), -th.y() + 0.02, th.y() - 0.02);
  if (config_.task == "lift") {
    state_.effector.z() =
        std::clamp(state_.effector.z(), state_.table_height + 0.02, state_.table_height + 0.30);
  } else {
    state_.effector.z() = rest_object_z_;
  }

  if (config_.task == "lift") {
    const bool grasp_cmd = applied[3] > 0.0;
    const double dist = (state_.effector - state_.object).norm();
    if (grasp_cmd && !state_.grasped && dist <= config_.grasp_radius) state_.grasped = true;
    if (!grasp_cmd && state_.grasped) state_.grasped = false;
    if (state_.grasped) {
      state_.object = state_.effector;
    } else {
      state_.object.z() = rest_object_z_;  // released objects settle back on the table
    }
  }

  state_.step_index += 1;

  double reward = shaped_reward(state_);
  bool terminal = false;
  if (config_.task == "reach") {
    const double dist = (state_.effector - target_point(state_)).norm();
    if (dist < config_.success_radius) {
      reward += config_.success_bonus;
      terminal = true;
    }
  } else {
    const double height = state_.object.z() - rest_object_z_;
    if (state_.grasped && height >= config_.lift_height) {
      reward += config_.success_bonus;
      terminal = true;
    }
  }

  success_ = terminal;
  done_ = terminal || state_.step_index >= config_.episode_steps;

  StepResult out;
  out.obs = observe();
  out.reward = reward;
  out.done = done_;
  out.success = terminal;
  return out;
}

std::vector<Triangle> ToyManipEnv::scene_triangles(const EnvState& s, bool with_object) const {
  return scene_triangles(s, config_.palette, with_object);
}

std::vector<Triangle> ToyManipEnv::scene_triangles(const EnvState& s, const Palette& pal,
                                                   bool with_object) const {
  const auto& g = config_.geometry;
  std::vector<Triangle> tris;
  tris.reserve(256);

  add_box(tris, {0, 0, g.floor_top_z - 0.05}, {1.6, 1.6, 0.05}, pal.floor, kIdFloor);
  add_box(tris, {0, 0, s.table_height - g.table_half.z()}, g.table_half, pal.table, kIdTable);
  add_cylinder(tris, {g.base_xy.x(), g.base_xy.y(), s.table_height}, g.base_radius, g.base_height,
               pal.base, kIdBasePillar);

  const Rgb eff_color = s.grasped ? pal.effector_grasp : pal.effector;
  const Eigen::Vector3d eff_base = s.effector - Eigen::Vector3d(0, 0, 0.015);
  add_cylinder(tris, eff_base, g.effector_radius, g.effector_height, eff_color, kIdEffector, 12);

  if (with_object) {
    const double h = 0.5 * s.object_size;
    add_box(tris, s.object, {h, h, h}, pal.object, kIdObject);
  }
  return tris;
}

RenderOut ToyManipEnv::render(const EnvState& state, const CameraPose& pose) const {
  if (!pose.valid()) throw std::invalid_argument("render: degenerate camera pose");
  return render_triangles(scene_triangles(state), pose, config_.look_at, config_.image_size,
                          config_.image_size, config_.palette.background);
}

Image8 ToyManipEnv::compose_frame(const RenderOut& r) {
  const Image8 depth = preprocess_depth(r.depth_m, noise_rng_, config_.depth);
  Image8 frame(r.rgb.width, r.rgb.height, 4);
  const size_t n = size_t(r.rgb.width) * r.rgb.height;
  for (size_t i = 0; i < n; ++i) {
    uint8_t rr = r.rgb.data[3 * i + 0];
    uint8_t gg = r.rgb.data[3 * i + 1];
    uint8_t bb = r.rgb.data[3 * i + 2];
    if (overlay_distractor_) {
      const auto& d = *overlay_distractor_;
      const double a = overlay_alpha_;
      rr = uint8_t(std::lround(a * rr + (1.0 - a) * d.data[3 * i + 0]));
      gg = uint8_t(std::lround(a * gg + (1.0 - a) * d.data[3 * i + 1]));
      bb = uint8_t(std::lround(a * bb + (1.0 - a) * d.data[3 * i + 2]));
    }
    frame.data[4 * i + 0] = rr;
    frame.data[4 * i + 1] = gg;
    frame.data[4 * i + 2] = bb;
    frame.data[4 * i + 3] = depth.data[i];
  }
  return frame;
}

MultiViewObservation ToyManipEnv::observe() {
  const RenderOut fixed = render(state_, fixed_pose());
  const RenderOut moving = render(state_, moving_pose_);

  MultiViewObservation obs;
  obs.moving_pose = moving_pose_;
  obs.state_hash = state_.hash();
  obs.step_index = state_.step_index;

  Image8 fixed_frame = compose_frame(fixed);
  Image8 moving_frame = compose_frame(moving);
  if (fixed_stack_.frames.empty()) {
    fixed_stack_.fill(fixed_frame, config_.frame_stack);
    moving_stack_.fill(moving_frame, config_.frame_stack);
  } else {
    fixed_stack_.push(std::move(fixed_frame));
    moving_stack_.push(std::move(moving_frame));
  }
  obs.fixed = fixed_stack_;
  obs.moving = moving_stack_;
  return obs;
}

Eigen::VectorXd scripted_oracle_action(const ToyManipEnv& env) {
  const EnvState& s = env.state();
  const EnvConfig& cfg = env.config();
  const double step_scale =
      std::max(1e-9, cfg.max_speed_mps * s.control_dt * s.velocity_gain);

  // compensate the action delay: steer relative to where the effector will be
  // once the queued commands have landed
  Eigen::Vector3d pred = s.effector;
  for (const auto& q : s.pending_actions) {
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    v.x() = clamp_unit(q[0]);
    v.y() = clamp_unit(q[1]);
    if (cfg.task == "lift") v.z() = clamp_unit(q[2]);
    pred += step_scale * v;
  }

  Eigen::VectorXd a = Eigen::VectorXd::Zero(cfg.action_dim());
  const Eigen::Vector3d to_target = env.target_point(s) - pred;

  if (cfg.task == "reach") {
    a[0] = clamp_unit(to_target.x() / step_scale);
    a[1] = clamp_unit(to_target.y() / step_scale);
    return a;
  }

  // lift: approach above, descend, grasp, raise
  if (!s.grasped) {
    const Eigen::Vector2d planar = to_target.head<2>();
    if (planar.norm() > 0.5 * cfg.grasp_radius) {
      a[0] = clamp_unit(planar.x() / step_scale);
      a[1] = clamp_unit(planar.y() / step_scale);
      a[2] = clamp_unit((s.object.z() + 0.02 - pred.z()) / step_scale);
    } else {
      a[2] = clamp_unit(to_target.z() / step_scale);
      if (to_target.norm() <= cfg.grasp_radius) a[3] = 1.0;
    }
  } else {
    a[2] = 1.0;
    a[3] = 1.0;
  }
  return a;
}

}  // namespace mvrl::sim
