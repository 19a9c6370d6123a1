#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mvrl/sim/env.hpp"

using namespace mvrl;
using namespace mvrl::sim;

namespace {

EnvConfig small_env(int image = 32) {
  EnvConfig cfg;
  cfg.image_size = image;
  cfg.episode_steps = 40;
  return cfg;
}

int count_id_pixels(const RenderOut& r, uint16_t id) {
  int n = 0;
  for (uint16_t v : r.ids) n += v == id ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("reset at magnitude zero uses range midpoints") {
  ToyManipEnv env(small_env());
  const auto obs = env.reset(0.0, 123);
  CHECK(obs.moving_pose.yaw_deg == doctest::Approx(0.0));
  CHECK(obs.moving_pose.pitch_deg == doctest::Approx(20.5));
  CHECK(obs.moving_pose.fov_deg == doctest::Approx(42.0));
  CHECK(obs.moving_pose.distance_m == doctest::Approx(1.33));
  CHECK(env.state().action_delay == 1);  // midpoint of [0,2]
}

TEST_CASE("reset is deterministic given (spec, magnitude, seed)") {
  ToyManipEnv a(small_env()), b(small_env());
  const auto oa = a.reset(0.7, 99);
  const auto ob = b.reset(0.7, 99);
  REQUIRE(oa.fixed.frames.size() == ob.fixed.frames.size());
  for (size_t i = 0; i < oa.fixed.frames.size(); ++i) {
    CHECK(oa.fixed.frames[i].data == ob.fixed.frames[i].data);
    CHECK(oa.moving.frames[i].data == ob.moving.frames[i].data);
  }
  CHECK(oa.moving_pose.yaw_deg == ob.moving_pose.yaw_deg);
  CHECK(oa.state_hash == ob.state_hash);

  // and different seeds move the camera
  const auto oc = a.reset(0.7, 100);
  CHECK(oc.moving_pose.yaw_deg != oa.moving_pose.yaw_deg);
}

TEST_CASE("camera yaw samples cover the range at full magnitude") {
  const auto spec = default_randomization();
  Rng rng(5);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 2000; ++i) {
    const CameraPose p = sample_camera_pose(spec, rng, 1.0);
    lo = std::min(lo, p.yaw_deg);
    hi = std::max(hi, p.yaw_deg);
    CHECK(p.yaw_deg >= -60.0);
    CHECK(p.yaw_deg <= 60.0);
  }
  CHECK(hi - lo >= 0.9 * 120.0);
}

TEST_CASE("range containment holds for every entry and magnitude") {
  const auto spec = default_randomization();
  Rng rng(17);
  for (double m : {0.0, 0.3, 1.0}) {
    for (const auto& [name, e] : spec.entries) {
      for (int i = 0; i < 2500; ++i) {
        const double v = e.sample(rng, m);
        CHECK(v >= std::min(e.lo(m), e.hi(m)) - 1e-12);
        CHECK(v <= std::max(e.lo(m), e.hi(m)) + 1e-12);
        if (m == 0.0) CHECK(v == doctest::Approx(e.multiplicative ? e.center : e.center));
      }
    }
  }
}

TEST_CASE("invalid randomization specs are rejected") {
  ToyManipEnv env(small_env());
  RandomizationSpec bad = default_randomization();
  bad.entries["camera_yaw"].half_range = -1.0;
  CHECK_THROWS_AS(env.reset(bad, 0.5, 1), std::invalid_argument);

  RandomizationSpec bad2 = default_randomization();
  bad2.entries["object_size"].center = -0.1;
  CHECK_THROWS_AS(env.reset(bad2, 0.5, 1), std::invalid_argument);
}

TEST_CASE("zero action from rest keeps the state and repeats the shaping reward") {
  EnvConfig cfg = small_env();
  ToyManipEnv env(cfg);
  env.reset(0.0, 42);
  const Eigen::Vector3d eff0 = env.state().effector;
  const Eigen::Vector3d obj0 = env.state().object;
  const double shaped = env.shaped_reward(env.state());

  const auto r1 = env.step(Eigen::VectorXd::Zero(cfg.action_dim()));
  CHECK(env.state().effector == eff0);
  CHECK(env.state().object == obj0);
  CHECK(r1.reward == doctest::Approx(shaped));
  const auto r2 = env.step(Eigen::VectorXd::Zero(cfg.action_dim()));
  CHECK(r2.reward == doctest::Approx(r1.reward));
}

TEST_CASE("action delay shifts trajectories by exactly the delay") {
  auto run = [](double delay_center, int steps) {
    EnvConfig cfg = small_env(16);
    cfg.randomization.entries["action_delay"] = {delay_center, 0.0, false};
    // freeze the physics so runs are comparable
    cfg.randomization.entries["control_timestep"] = {0.02, 0.0, false};
    cfg.randomization.entries["joint_damping"] = {1.0, 0.0, true};
    cfg.randomization.entries["joint_armature"] = {1.0, 0.0, true};
    ToyManipEnv env(cfg);
    env.reset(0.0, 7);
    std::vector<Eigen::Vector3d> traj;
    traj.push_back(env.state().effector);
    Rng rng(3);
    for (int t = 0; t < steps; ++t) {
      Eigen::VectorXd a(2);
      a << rng.uniform(-1, 1), rng.uniform(-1, 1);
      env.step(a);
      traj.push_back(env.state().effector);
    }
    return traj;
  };

  const auto t0 = run(0.0, 20);
  const auto t2 = run(2.0, 20);
  for (int t = 0; t + 2 < 20; ++t) {
    CHECK((t2[size_t(t) + 2] - t0[size_t(t)]).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("grasp rule: inside the radius plus grasp command sets grasped") {
  EnvConfig cfg = small_env(16);
  cfg.task = "lift";
  cfg.randomization.entries["action_delay"] = {0.0, 0.0, false};  // applied == commanded
  ToyManipEnv env(cfg);
  env.reset(0.0, 21);

  // approach without grasping until the effector sits inside the radius
  int guard = 0;
  while ((env.state().effector - env.state().object).norm() > 0.8 * cfg.grasp_radius &&
         guard++ < 60 && !env.done()) {
    Eigen::VectorXd a = scripted_oracle_action(env);
    a[3] = -1.0;
    env.step(a);
  }
  REQUIRE((env.state().effector - env.state().object).norm() <= cfg.grasp_radius);
  CHECK(!env.state().grasped);

  // single-step rule: stay put, command grasp
  Eigen::VectorXd grasp = Eigen::VectorXd::Zero(4);
  grasp[3] = 1.0;
  env.step(grasp);
  CHECK(env.state().grasped);

  // and release drops the object back to the table
  Eigen::VectorXd release = Eigen::VectorXd::Zero(4);
  release[3] = -1.0;
  env.step(release);
  CHECK(!env.state().grasped);

  // the delay-aware oracle completes the task end to end
  EnvConfig cfg2 = small_env(16);
  cfg2.task = "lift";
  ToyManipEnv lift_env(cfg2);
  lift_env.reset(0.0, 21);
  while (!lift_env.done()) lift_env.step(scripted_oracle_action(lift_env));
  CHECK(lift_env.last_success());
}

TEST_CASE("step after done throws") {
  EnvConfig cfg = small_env(16);
  cfg.episode_steps = 3;
  ToyManipEnv env(cfg);
  env.reset(0.0, 1);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(cfg.action_dim());
  env.step(a);
  env.step(a);
  const auto r = env.step(a);
  CHECK(r.done);
  CHECK_THROWS_AS(env.step(a), std::logic_error);
}

TEST_CASE("renders from opposing yaws differ but keep the object visible") {
  EnvConfig cfg = small_env(48);
  ToyManipEnv env(cfg);
  env.reset(0.0, 11);

  CameraPose left = env.fixed_pose();
  left.yaw_deg = -30;
  CameraPose right = env.fixed_pose();
  right.yaw_deg = 30;

  const RenderOut ra = env.render(env.state(), left);
  const RenderOut rb = env.render(env.state(), right);
  CHECK(ra.rgb.data != rb.rgb.data);

  const int ca = count_id_pixels(ra, kIdObject);
  const int cb = count_id_pixels(rb, kIdObject);
  REQUIRE(ca > 0);
  REQUIRE(cb > 0);
  CHECK(double(std::max(ca, cb)) / double(std::min(ca, cb)) <= 2.0);

  // object pixels are red-dominant under flat shading
  int red = 0;
  for (int y = 0; y < ra.rgb.height; ++y)
    for (int x = 0; x < ra.rgb.width; ++x)
      if (ra.ids[size_t(y) * ra.rgb.width + x] == kIdObject &&
          ra.rgb.at(x, y, 0) > ra.rgb.at(x, y, 1) && ra.rgb.at(x, y, 0) > ra.rgb.at(x, y, 2))
        ++red;
  CHECK(red == ca);
}

TEST_CASE("same state and pose render identically") {
  EnvConfig cfg = small_env(32);
  ToyManipEnv env(cfg);
  env.reset(0.3, 9);
  const RenderOut a = env.render(env.state(), env.moving_pose());
  const RenderOut b = env.render(env.state(), env.moving_pose());
  CHECK(a.rgb.data == b.rgb.data);
  CHECK(a.depth_m.data == b.depth_m.data);
}

TEST_CASE("empty scene renders no object pixels") {
  EnvConfig cfg = small_env(32);
  ToyManipEnv env(cfg);
  env.reset(0.0, 2);
  const auto tris = env.scene_triangles(env.state(), /*include_object=*/false);
  const RenderOut r = render_triangles(tris, env.fixed_pose(), cfg.look_at, cfg.image_size,
                                       cfg.image_size, cfg.palette.background);
  CHECK(count_id_pixels(r, kIdObject) == 0);
}

TEST_CASE("degenerate camera pose is rejected") {
  ToyManipEnv env(small_env(16));
  env.reset(0.0, 1);
  CameraPose bad = env.fixed_pose();
  bad.distance_m = 0.0;
  CHECK_THROWS_AS(env.render(env.state(), bad), std::invalid_argument);
}

TEST_CASE("observation carries the state hash of the rendered state") {
  ToyManipEnv env(small_env(16));
  const auto obs = env.reset(0.2, 31);
  CHECK(obs.state_hash == env.state().hash());
  const auto r = env.step(Eigen::VectorXd::Zero(2));
  CHECK(r.obs.state_hash == env.state().hash());
}

TEST_CASE("depth clipping endpoints") {
  DepthConfig cfg;
  cfg.noise_enabled = false;
  cfg.blur_enabled = false;

  PlaneF far_plane(16, 16, 3.0f);
  const Image8 far = preprocess_depth(far_plane, uint64_t(0), cfg);
  for (uint8_t v : far.data) CHECK(v == 255);

  PlaneF zero_plane(16, 16, 0.0f);
  const Image8 zero = preprocess_depth(zero_plane, uint64_t(1), cfg);
  for (uint8_t v : zero.data) CHECK(v == 0);
}

TEST_CASE("depth noise magnitude matches the combined model at 1 m") {
  DepthConfig cfg;
  cfg.blur_enabled = false;  // isolate the per-pixel noise
  PlaneF plane(1000, 1000, 1.0f);
  const Image8 img = preprocess_depth(plane, uint64_t(123), cfg);

  double sum = 0.0, sq = 0.0;
  for (uint8_t v : img.data) {
    const double meters = double(v) * cfg.clip_m / 255.0;
    sum += meters;
    sq += meters * meters;
  }
  const double n = double(img.data.size());
  const double mean = sum / n;
  const double std = std::sqrt(sq / n - mean * mean);
  const double expected = std::sqrt(0.01 * 0.01 + 0.05 * 0.05);
  CHECK(std == doctest::Approx(expected).epsilon(0.05));
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("noise-free depth mapping is monotone in metric depth") {
  DepthConfig cfg;
  cfg.noise_enabled = false;
  int prev = -1;
  for (double d = 0.0; d <= 2.5; d += 0.01) {
    PlaneF plane(4, 4, float(d));
    const Image8 img = preprocess_depth(plane, uint64_t(0), cfg);
    CHECK(int(img.data[0]) >= prev);
    prev = img.data[0];
  }
  CHECK(prev == 255);
}

TEST_CASE("golden canonical render") {
  EnvConfig cfg = small_env(64);
  ToyManipEnv env(cfg);
  env.reset(0.0, 1234);
  const RenderOut r = env.render(env.state(), env.fixed_pose());

  DepthConfig clean = cfg.depth;
  clean.noise_enabled = false;
  clean.blur_enabled = false;
  const Image8 depth = preprocess_depth(r.depth_m, uint64_t(0), clean);
  Image8 rgba(r.rgb.width, r.rgb.height, 4);
  for (size_t i = 0; i < size_t(r.rgb.width) * r.rgb.height; ++i) {
    rgba.data[4 * i + 0] = r.rgb.data[3 * i + 0];
    rgba.data[4 * i + 1] = r.rgb.data[3 * i + 1];
    rgba.data[4 * i + 2] = r.rgb.data[3 * i + 2];
    rgba.data[4 * i + 3] = depth.data[i];
  }

  const std::string golden_path = std::string(MVRL_TEST_DATA_DIR) + "/golden_canonical.png";
  if (!std::filesystem::exists(golden_path)) {
    // freeze on first generation; committed alongside the tests
    write_png(golden_path, rgba);
  }
  const Image8 golden = read_png(golden_path);
  REQUIRE(golden.same_shape(rgba));
  CHECK(golden.data == rgba.data);
}
