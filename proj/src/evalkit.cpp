#include "mvrl/eval/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mvrl::eval {

using cli::json;

double EvalReport::mean_rate() const {
  if (conditions.empty()) return 0.0;
  double s = 0.0;
  for (const auto& c : conditions) s += c.rate();
  return s / double(conditions.size());
}

json EvalReport::to_json() const {
  json j;
  j["kind"] = kind;
  j["task"] = task;
  j["fingerprint"] = fingerprint;
  j["policy"] = policy;
  j["ablate"] = ablate;
  j["seed"] = seed;
  j["mean_rate"] = mean_rate();
  j["conditions"] = json::array();
  for (const auto& c : conditions)
    j["conditions"].push_back(json{{"name", c.name},
                                   {"episodes", c.episodes},
                                   {"successes", c.successes},
                                   {"rate", c.rate()},
                                   {"mean_return", c.mean_return}});
  return j;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << kind << " sweep | task " << task << " | policy " << policy;
  if (ablate != "none") os << " | ablate " << ablate;
  os << " | seed " << seed << " | config " << fingerprint << "\n";
  for (const auto& c : conditions) {
    os << "  " << c.name << ": " << c.successes << "/" << c.episodes << " = "
       << std::round(c.rate() * 1000.0) / 10.0 << "%  (mean return "
       << std::round(c.mean_return * 100.0) / 100.0 << ")\n";
  }
  os << "  mean rate: " << std::round(mean_rate() * 1000.0) / 10.0 << "%\n";
  return os.str();
}

void EvalReport::save(const std::string& prefix) const {
  {
    std::ofstream f(prefix + ".json");
    f << to_json().dump(2) << "\n";
  }
  std::ofstream f(prefix + ".txt");
  f << to_text();
}

EpisodeOutcome run_eval_episode(sim::ToyManipEnv& env, const sim::RandomizationSpec& spec,
                                double magnitude, agent::Agent* agent, PolicyKind kind,
                                uint64_t seed, double smooth_beta) {
  Rng rng(seed);
  sim::MultiViewObservation obs = env.reset(spec, magnitude, seed);

  EpisodeOutcome out;
  Eigen::VectorXd smoothed = Eigen::VectorXd::Zero(env.config().action_dim());
  bool have_prev = false;
  while (!env.done()) {
    Eigen::VectorXd a;
    switch (kind) {
      case PolicyKind::kTrained: {
        const Eigen::VectorXf af = agent->act(obs.moving, /*explore=*/false, rng);
        a = af.cast<double>();
        break;
      }
      case PolicyKind::kRandom: {
        a.resize(env.config().action_dim());
        for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.uniform(-1.0, 1.0);
        break;
      }
      case PolicyKind::kOracle:
        a = sim::scripted_oracle_action(env);
        break;
    }
    if (smooth_beta > 0.0 && kind == PolicyKind::kTrained) {
      a = agent::Agent::smooth_action(a, have_prev ? smoothed : a, smooth_beta);
      smoothed = a;
      have_prev = true;
    }
    const sim::StepResult r = env.step(a);
    obs = r.obs;
    out.episode_return += r.reward;
    out.steps += 1;
    if (r.success) out.success = true;
  }
  return out;
}

namespace {

sim::RandomizationSpec pin_camera(const sim::RandomizationSpec& base, double yaw, Rng& rng) {
  sim::RandomizationSpec spec = base;
  spec.entries["camera_yaw"] = {yaw, 0.0, false};
  // remaining camera parameters drawn once here, at full range
  for (const char* name : {"camera_pitch", "camera_fov", "camera_distance", "camera_height"})
    spec.entries[name] = {base.at(name).sample(rng, 1.0), 0.0, false};
  return spec;
}

}  // namespace

EvalReport viewpoint_sweep(const cli::ExperimentConfig& cfg, agent::Agent* agent, PolicyKind kind,
                           const std::vector<std::pair<double, double>>& yaw_bins_deg,
                           int episodes_per_bin, uint64_t seed) {
  if (kind == PolicyKind::kTrained && !agent)
    throw std::invalid_argument("viewpoint_sweep: agent required for trained policy");
  const auto& base = cfg.env.randomization;
  for (const auto& [lo, hi] : yaw_bins_deg) {
    if (lo < 0 || hi < lo || hi > base.at("camera_yaw").hi() + 1e-9)
      throw std::invalid_argument("viewpoint_sweep: bin outside the trained yaw range");
  }

  EvalReport rep;
  rep.kind = "viewpoint";
  rep.task = cfg.task;
  rep.fingerprint = cli::config_fingerprint(cfg);
  rep.policy = kind == PolicyKind::kTrained ? "trained"
               : kind == PolicyKind::kRandom ? "random"
                                             : "oracle";
  rep.ablate = cfg.ablate;
  rep.seed = seed;

  sim::ToyManipEnv env(cfg.env);
  Rng master(seed);
  for (const auto& [lo, hi] : yaw_bins_deg) {
    ConditionResult cond;
    std::ostringstream name;
    name << "yaw[" << lo << "," << hi << "]";
    cond.name = name.str();
    Rng bin_rng = master.fork(uint64_t(std::llround(lo * 1000 + hi)));
    for (int e = 0; e < episodes_per_bin; ++e) {
      const double abs_yaw = bin_rng.uniform(lo, hi);
      const double yaw = bin_rng.uniform() < 0.5 ? -abs_yaw : abs_yaw;
      sim::RandomizationSpec spec = pin_camera(cfg.env.randomization, yaw, bin_rng);
      const EpisodeOutcome out = run_eval_episode(env, spec, 1.0, agent, kind, bin_rng.next_u64(),
                                                  cfg.eval.smooth_beta);
      cond.episodes += 1;
      cond.successes += out.success ? 1 : 0;
      cond.mean_return += out.episode_return;
    }
    if (cond.episodes) cond.mean_return /= cond.episodes;
    rep.conditions.push_back(cond);
  }
  return rep;
}

std::vector<PaletteCondition> builtin_palettes() {
  std::vector<PaletteCondition> out;
  PaletteCondition identity;
  identity.name = "identity";
  out.push_back(identity);

  PaletteCondition dark;
  dark.name = "dark";
  dark.palette.background = {40, 44, 56};
  dark.palette.floor = {30, 30, 34};
  dark.palette.table = {70, 60, 85};
  dark.palette.base = {120, 120, 40};
  out.push_back(dark);

  PaletteCondition pastel;
  pastel.name = "pastel";
  pastel.palette.background = {235, 220, 200};
  pastel.palette.floor = {200, 210, 190};
  pastel.palette.table = {180, 200, 230};
  pastel.palette.base = {150, 100, 150};
  out.push_back(pastel);

  PaletteCondition textured;
  textured.name = "textured_overlay";
  textured.overlay_alpha = 0.6;
  out.push_back(textured);

  PaletteCondition recolor;
  recolor.name = "target_recolor";
  recolor.palette.object = {40, 180, 60};  // collides with the effector hue
  recolor.recolors_target = true;
  out.push_back(recolor);
  return out;
}

EvalReport appearance_sweep(const cli::ExperimentConfig& cfg, agent::Agent* agent, PolicyKind kind,
                            const std::vector<PaletteCondition>& palettes, int episodes,
                            uint64_t seed) {
  EvalReport rep;
  rep.kind = "appearance";
  rep.task = cfg.task;
  rep.fingerprint = cli::config_fingerprint(cfg);
  rep.policy = kind == PolicyKind::kTrained ? "trained"
               : kind == PolicyKind::kRandom ? "random"
                                             : "oracle";
  rep.ablate = cfg.ablate;
  rep.seed = seed;

  Rng master(seed);
  uint64_t cond_idx = 0;
  for (const auto& pc : palettes) {
    sim::ToyManipEnv env(cfg.env);
    env.set_palette(pc.palette);
    Rng rng = master.fork(cond_idx++);
    augment::DistractorSource distractors;

    ConditionResult cond;
    cond.name = pc.recolors_target ? pc.name + " [target recolor]" : pc.name;
    for (int e = 0; e < episodes; ++e) {
      if (pc.overlay_alpha < 1.0) {
        env.set_observation_overlay(
            distractors.sample(cfg.env.image_size, cfg.env.image_size, rng), pc.overlay_alpha);
      } else {
        env.set_observation_overlay(std::nullopt, 1.0);
      }
      // full-range camera, as during late training
      const EpisodeOutcome out = run_eval_episode(env, cfg.env.randomization, 1.0, agent, kind,
                                                  rng.next_u64(), cfg.eval.smooth_beta);
      cond.episodes += 1;
      cond.successes += out.success ? 1 : 0;
      cond.mean_return += out.episode_return;
    }
    if (cond.episodes) cond.mean_return /= cond.episodes;
    rep.conditions.push_back(cond);
  }
  return rep;
}

std::vector<sim::EnvState> record_trajectory(const cli::ExperimentConfig& cfg, agent::Agent* agent,
                                             PolicyKind kind, uint64_t seed, int max_steps) {
  sim::ToyManipEnv env(cfg.env);
  Rng rng(seed);
  sim::MultiViewObservation obs = env.reset(cfg.env.randomization, 0.0, seed);
  std::vector<sim::EnvState> states;
  states.push_back(env.state());
  while (!env.done() && int(states.size()) <= max_steps) {
    Eigen::VectorXd a;
    if (kind == PolicyKind::kTrained) {
      a = agent->act(obs.moving, false, rng).cast<double>();
    } else if (kind == PolicyKind::kOracle) {
      a = sim::scripted_oracle_action(env);
    } else {
      a.resize(env.config().action_dim());
      for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.uniform(-1.0, 1.0);
    }
    obs = env.step(a).obs;
    states.push_back(env.state());
  }
  return states;
}

std::vector<EmbeddingRow> export_embeddings(const cli::ExperimentConfig& cfg, agent::Agent& agent,
                                            const std::vector<sim::EnvState>& trajectory,
                                            const std::vector<sim::CameraPose>& poses,
                                            uint64_t seed) {
  if (trajectory.empty()) throw std::invalid_argument("export_embeddings: empty trajectory");
  sim::ToyManipEnv env(cfg.env);
  std::vector<EmbeddingRow> rows;
  rows.reserve(trajectory.size() * poses.size());

  for (size_t p = 0; p < poses.size(); ++p) {
    Rng noise(Rng(seed).fork(p).next_u64());
    sim::FrameStack stack;
    for (size_t t = 0; t < trajectory.size(); ++t) {
      const sim::RenderOut r = env.render(trajectory[t], poses[p]);
      const Image8 depth = sim::preprocess_depth(r.depth_m, noise, cfg.env.depth);
      Image8 frame(r.rgb.width, r.rgb.height, 4);
      for (size_t i = 0; i < size_t(r.rgb.width) * r.rgb.height; ++i) {
        frame.data[4 * i + 0] = r.rgb.data[3 * i + 0];
        frame.data[4 * i + 1] = r.rgb.data[3 * i + 1];
        frame.data[4 * i + 2] = r.rgb.data[3 * i + 2];
        frame.data[4 * i + 3] = depth.data[i];
      }
      if (stack.frames.empty())
        stack.fill(frame, cfg.env.frame_stack);
      else
        stack.push(frame);

      EmbeddingRow row;
      row.timestep = int(t);
      row.pose_id = int(p);
      row.state_hash = trajectory[t].hash();
      const auto pyr = agent.encode(stack);
      row.embedding = pyr.embedding;
      row.critic_penultimate =
          agent.critic_penultimate(pyr.embedding, agent.policy_action(pyr.embedding));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_embedding_table(const std::vector<EmbeddingRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  if (rows.empty()) return;
  f << "timestep\tpose_id\tstate_hash";
  for (Eigen::Index i = 0; i < rows[0].embedding.size(); ++i) f << "\temb_" << i;
  for (Eigen::Index i = 0; i < rows[0].critic_penultimate.size(); ++i) f << "\tcritic_" << i;
  f << "\n";
  for (const auto& r : rows) {
    f << r.timestep << "\t" << r.pose_id << "\t" << r.state_hash;
    for (Eigen::Index i = 0; i < r.embedding.size(); ++i) f << "\t" << r.embedding[i];
    for (Eigen::Index i = 0; i < r.critic_penultimate.size(); ++i)
      f << "\t" << r.critic_penultimate[i];
    f << "\n";
  }
}

PlaneF upsample_bilinear(const PlaneF& src, int w, int h) {
  PlaneF out(w, h);
  for (int y = 0; y < h; ++y) {
    const double sy = h > 1 ? double(y) * (src.height - 1) / (h - 1) : 0.0;
    const int y0 = int(sy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < w; ++x) {
      const double sx = w > 1 ? double(x) * (src.width - 1) / (w - 1) : 0.0;
      const int x0 = int(sx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double fx = sx - x0;
      out.at(x, y) = float((1 - fy) * ((1 - fx) * src.at(x0, y0) + fx * src.at(x1, y0)) +
                           fy * ((1 - fx) * src.at(x0, y1) + fx * src.at(x1, y1)));
    }
  }
  return out;
}

CorrespondenceResult correspondence_map(const agent::Agent& agent, const sim::FrameStack& image_a,
                                        std::pair<int, int> query_pixel,
                                        const sim::FrameStack& image_b, const std::string& layer) {
  const int img = image_a.frames.at(0).width;
  const auto [qx, qy] = query_pixel;
  if (qx < 0 || qy < 0 || qx >= img || qy >= img)
    throw std::invalid_argument("correspondence_map: query pixel out of bounds");

  const auto pyr_a = agent.encode(image_a);
  const auto pyr_b = agent.encode(image_b);
  const auto& map_a = pyr_a.map(layer);
  const auto& map_b = pyr_b.map(layer);

  const int cell_x = std::min(map_a.width - 1, qx * map_a.width / img);
  const int cell_y = std::min(map_a.height - 1, qy * map_a.height / img);
  const Eigen::VectorXf q = map_a.data.col(cell_y * map_a.width + cell_x);
  const float qn = std::max(1e-12f, q.norm());

  PlaneF sim_cells(map_b.width, map_b.height);
  for (int p = 0; p < map_b.pixels(); ++p) {
    const Eigen::VectorXf v = map_b.data.col(p);
    const float vn = std::max(1e-12f, v.norm());
    sim_cells.data[size_t(p)] = q.dot(v) / (qn * vn);
  }

  CorrespondenceResult out;
  out.layer = layer;
  out.query_cell = {cell_x, cell_y};
  out.similarity = upsample_bilinear(sim_cells, img, img);
  // argmax over cells (exact), reported at image resolution
  int best = 0;
  for (int p = 1; p < map_b.pixels(); ++p)
    if (sim_cells.data[size_t(p)] > sim_cells.data[size_t(best)]) best = p;
  const int bx = best % map_b.width, by = best / map_b.width;
  out.argmax = {map_b.width > 1 ? bx * (img - 1) / (map_b.width - 1) : 0,
                map_b.height > 1 ? by * (img - 1) / (map_b.height - 1) : 0};
  out.peak_similarity = sim_cells.data[size_t(best)];
  return out;
}

PlaneF attention_map(const agent::Agent& agent, const sim::FrameStack& obs) {
  const nn::FeatureMap<float> grad = agent.value_gradient_stage2(obs);
  const auto pyr = agent.encode(obs);
  const auto& m2 = pyr.map("stage2");

  Eigen::VectorXf weights = grad.data.rowwise().mean();  // channel weights
  PlaneF cam(m2.width, m2.height);
  for (int p = 0; p < m2.pixels(); ++p) {
    const float v = weights.dot(m2.data.col(p));
    cam.data[size_t(p)] = std::max(0.f, v);
  }
  const float mx = *std::max_element(cam.data.begin(), cam.data.end());
  if (mx > 0.f)
    for (auto& v : cam.data) v /= mx;
  const int img = obs.frames.at(0).width;
  return upsample_bilinear(cam, img, img);
}

void write_heat_png(const PlaneF& map01, const std::string& path) {
  Image8 img(map01.width, map01.height, 3);
  for (int y = 0; y < map01.height; ++y)
    for (int x = 0; x < map01.width; ++x) {
      const float v = std::clamp(map01.at(x, y), 0.f, 1.f);
      img.at(x, y, 0) = uint8_t(std::lround(255.0 * v));
      img.at(x, y, 1) = uint8_t(std::lround(40.0 * v));
      img.at(x, y, 2) = uint8_t(std::lround(255.0 * (1.0 - v)));
    }
  write_png(path, img);
}

}  // namespace mvrl::eval
