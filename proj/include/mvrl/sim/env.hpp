#pragma once

#include <Eigen/Dense>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "mvrl/core/image.hpp"
#include "mvrl/core/rng.hpp"
#include "mvrl/sim/camera.hpp"
#include "mvrl/sim/depth.hpp"
#include "mvrl/sim/randomization.hpp"
#include "mvrl/sim/renderer.hpp"

namespace mvrl::sim {

// Most recent frames, oldest first; each frame is H x W x 4 (RGB + depth code).
struct FrameStack {
  std::vector<Image8> frames;

  const Image8& newest() const { return frames.back(); }
  void push(Image8 frame) {
    frames.erase(frames.begin());
    frames.push_back(std::move(frame));
  }
  void fill(const Image8& frame, int n) { frames.assign(size_t(n), frame); }
};

// Paired views rendered from one simulator state at one timestep.
struct MultiViewObservation {
  FrameStack fixed;
  FrameStack moving;
  CameraPose moving_pose;
  uint64_t state_hash = 0;
  int step_index = 0;
};

struct EnvState {
  Eigen::Vector3d effector{0, 0, 0};
  Eigen::Vector3d object{0, 0, 0};
  double object_size = 0.05;
  bool grasped = false;
  int step_index = 0;
  std::deque<Eigen::VectorXd> pending_actions;

  // physics sampled per episode
  double control_dt = 0.02;
  double velocity_gain = 1.0;
  double table_height = 0.0;
  int action_delay = 1;

  uint64_t hash() const;
};

struct EnvConfig {
  std::string task = "reach";  // reach | lift
  int image_size = 128;
  int frame_stack = 3;
  int episode_steps = 100;
  double success_radius = 0.03;  // reach: effector-to-target distance
  double lift_height = 0.10;     // lift: object raise above rest height
  double grasp_radius = 0.04;
  double max_speed_mps = 1.5;
  double reach_scale = 0.5;  // distance normalization for shaping
  double success_bonus = 1.0;
  DepthConfig depth;
  SceneGeometry geometry;
  Palette palette;
  RandomizationSpec randomization = default_randomization();
  std::optional<CameraPose> fixed_pose;  // defaults to range midpoints
  Eigen::Vector3d look_at{0, 0, 0.05};

  int action_dim() const { return task == "lift" ? 4 : 2; }
};

struct StepResult {
  MultiViewObservation obs;
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

// Kinematic tabletop manipulation with randomized physics and cameras.
// Single-threaded; all randomness flows from the reset seed.
class ToyManipEnv {
 public:
  explicit ToyManipEnv(EnvConfig config);

  MultiViewObservation reset(const RandomizationSpec& spec, double magnitude, uint64_t seed);
  MultiViewObservation reset(double magnitude, uint64_t seed) {
    return reset(config_.randomization, magnitude, seed);
  }

  StepResult step(const Eigen::VectorXd& action);

  // Deterministic RGB-D render of an arbitrary state; depth is raw meters.
  RenderOut render(const EnvState& state, const CameraPose& pose) const;

  std::vector<Triangle> scene_triangles(const EnvState& state, bool include_object = true) const;
  std::vector<Triangle> scene_triangles(const EnvState& state, const Palette& palette,
                                        bool include_object = true) const;

  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  bool done() const { return done_; }
  bool last_success() const { return success_; }
  CameraPose fixed_pose() const;
  const CameraPose& moving_pose() const { return moving_pose_; }
  double shaped_reward(const EnvState& state) const;
  Eigen::Vector3d target_point(const EnvState& state) const;

  // Palette override for appearance sweeps; applies to subsequent renders.
  void set_palette(const Palette& p) { config_.palette = p; }
  void set_observation_overlay(std::optional<Image8> distractor, double alpha) {
    overlay_distractor_ = std::move(distractor);
    overlay_alpha_ = alpha;
  }

 private:
  MultiViewObservation observe();
  Image8 compose_frame(const RenderOut& r);

  EnvConfig config_;
  EnvState state_;
  CameraPose moving_pose_;
  Rng noise_rng_;
  FrameStack fixed_stack_, moving_stack_;
  bool done_ = true;
  bool success_ = false;
  double rest_object_z_ = 0.0;
  std::optional<Image8> overlay_distractor_;
  double overlay_alpha_ = 0.5;
};

// Ground-truth proportional controller; reaches the target deterministically.
Eigen::VectorXd scripted_oracle_action(const ToyManipEnv& env);

}  // namespace mvrl::sim
