#include "mvrl/cli/config.hpp"

#include <fstream>
#include <sstream>

namespace mvrl::cli {

namespace {

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json rgb_to_json(const sim::Rgb& c) { return json::array({c.r, c.g, c.b}); }

sim::Rgb rgb_from_json(const json& j) {
  return sim::Rgb{uint8_t(j.at(0).get<int>()), uint8_t(j.at(1).get<int>()),
                  uint8_t(j.at(2).get<int>())};
}

json palette_to_json(const sim::Palette& p) {
  return json{{"background", rgb_to_json(p.background)}, {"floor", rgb_to_json(p.floor)},
              {"table", rgb_to_json(p.table)},           {"base", rgb_to_json(p.base)},
              {"effector", rgb_to_json(p.effector)},     {"effector_grasp", rgb_to_json(p.effector_grasp)},
              {"object", rgb_to_json(p.object)}};
}

void palette_from_json(const json& j, sim::Palette& p) {
  if (j.contains("background")) p.background = rgb_from_json(j["background"]);
  if (j.contains("floor")) p.floor = rgb_from_json(j["floor"]);
  if (j.contains("table")) p.table = rgb_from_json(j["table"]);
  if (j.contains("base")) p.base = rgb_from_json(j["base"]);
  if (j.contains("effector")) p.effector = rgb_from_json(j["effector"]);
  if (j.contains("effector_grasp")) p.effector_grasp = rgb_from_json(j["effector_grasp"]);
  if (j.contains("object")) p.object = rgb_from_json(j["object"]);
}

json randomization_to_json(const sim::RandomizationSpec& s) {
  json j = json::object();
  for (const auto& [name, e] : s.entries)
    j[name] = json{{"center", e.center},
                   {"half_range", e.half_range},
                   {"kind", e.multiplicative ? "multiplicative" : "additive"}};
  return j;
}

void randomization_from_json(const json& j, sim::RandomizationSpec& s) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    sim::RangeEntry e = s.entries.count(it.key()) ? s.entries[it.key()] : sim::RangeEntry{};
    get_if(it.value(), "center", e.center);
    get_if(it.value(), "half_range", e.half_range);
    if (it.value().contains("kind"))
      e.multiplicative = it.value()["kind"].get<std::string>() == "multiplicative";
    s.entries[it.key()] = e;
  }
}

}  // namespace

void ExperimentConfig::resolve() {
  env.task = task;
  agent.action_dim = env.action_dim();
  agent.n_step = agent.n_step;  // agent owns it; replay reads from here
  encoder.image_size = env.image_size;
  encoder.in_channels = env.frame_stack * 4;
  if (ablate == "no_multiview") agent.multiview_enabled = false;
  if (ablate == "no_stn") encoder.stn_enabled = false;
  env.randomization.validate();
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.resolve();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["task"] = cfg.task;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["ablate"] = cfg.ablate;

  json e;
  e["image_size"] = cfg.env.image_size;
  e["frame_stack"] = cfg.env.frame_stack;
  e["episode_steps"] = cfg.env.episode_steps;
  e["success_radius"] = cfg.env.success_radius;
  e["lift_height"] = cfg.env.lift_height;
  e["grasp_radius"] = cfg.env.grasp_radius;
  e["max_speed_mps"] = cfg.env.max_speed_mps;
  e["reach_scale"] = cfg.env.reach_scale;
  e["success_bonus"] = cfg.env.success_bonus;
  e["depth"] = json{{"noise_enabled", cfg.env.depth.noise_enabled},
                    {"blur_enabled", cfg.env.depth.blur_enabled},
                    {"noise_sigma_m", cfg.env.depth.noise_sigma_m},
                    {"noise_depth_scale", cfg.env.depth.noise_depth_scale},
                    {"blur_sigma", cfg.env.depth.blur_sigma},
                    {"blur_kernel", cfg.env.depth.blur_kernel},
                    {"clip_m", cfg.env.depth.clip_m}};
  e["palette"] = palette_to_json(cfg.env.palette);
  e["randomization"] = randomization_to_json(cfg.env.randomization);
  j["env"] = e;

  j["encoder"] = json{{"stem_channels", cfg.encoder.stem_channels},
                      {"stage1_channels", cfg.encoder.stage1_channels},
                      {"stage2_channels", cfg.encoder.stage2_channels},
                      {"feature_dim", cfg.encoder.feature_dim},
                      {"loc_channels", cfg.encoder.loc_channels},
                      {"loc_hidden", cfg.encoder.loc_hidden},
                      {"stn_enabled", cfg.encoder.stn_enabled}};

  j["augment"] = json{{"enabled", cfg.augment.enabled},
                      {"overlay_alpha", cfg.augment.overlay_alpha},
                      {"spectrum_mask_fraction", cfg.augment.spectrum_mask_fraction},
                      {"distractor_dir", cfg.augment.distractor_dir}};

  j["agent"] = json{{"batch_size", cfg.agent.batch_size},
                    {"n_step", cfg.agent.n_step},
                    {"discount", cfg.agent.discount},
                    {"buffer_capacity", cfg.agent.buffer_capacity},
                    {"hidden_dim", cfg.agent.hidden_dim},
                    {"encoder_lr", cfg.agent.encoder_lr},
                    {"stn_lr", cfg.agent.stn_lr},
                    {"actor_lr", cfg.agent.actor_lr},
                    {"critic_lr", cfg.agent.critic_lr},
                    {"ema_rate", cfg.agent.ema_rate},
                    {"explore_sigma_start", cfg.agent.explore_sigma_start},
                    {"explore_sigma_end", cfg.agent.explore_sigma_end},
                    {"explore_decay_steps", cfg.agent.explore_decay_steps},
                    {"noise_clip", cfg.agent.noise_clip},
                    {"temperature", cfg.agent.temperature},
                    {"lambda", cfg.agent.lambda},
                    {"normalize_embeddings", cfg.agent.normalize_embeddings},
                    {"align_grads_into_fixed", cfg.agent.align_grads_into_fixed},
                    {"align_layers", cfg.agent.align_layers},
                    {"multiview_enabled", cfg.agent.multiview_enabled},
                    {"augment_contrastive", cfg.agent.augment_contrastive},
                    {"threads", cfg.agent.threads}};

  j["curriculum"] = json{{"threshold_step", cfg.curriculum.threshold_step},
                         {"rate_k", cfg.curriculum.rate_k}};

  j["train"] = json{{"total_steps", cfg.train.total_steps},
                    {"warmup_steps", cfg.train.warmup_steps},
                    {"update_every", cfg.train.update_every},
                    {"log_every", cfg.train.log_every},
                    {"checkpoint_every", cfg.train.checkpoint_every},
                    {"eval_every", cfg.train.eval_every},
                    {"eval_episodes", cfg.train.eval_episodes},
                    {"save_buffer", cfg.train.save_buffer}};

  json bins = json::array();
  for (auto& [lo, hi] : cfg.eval.yaw_bins_deg) bins.push_back(json::array({lo, hi}));
  j["eval"] = json{{"yaw_bins_deg", bins},
                   {"episodes_per_bin", cfg.eval.episodes_per_bin},
                   {"smooth_beta", cfg.eval.smooth_beta}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  get_if(j, "task", cfg.task);
  get_if(j, "seed", cfg.seed);
  get_if(j, "out_dir", cfg.out_dir);
  get_if(j, "ablate", cfg.ablate);

  if (j.contains("env")) {
    const json& e = j["env"];
    get_if(e, "image_size", cfg.env.image_size);
    get_if(e, "frame_stack", cfg.env.frame_stack);
    get_if(e, "episode_steps", cfg.env.episode_steps);
    get_if(e, "success_radius", cfg.env.success_radius);
    get_if(e, "lift_height", cfg.env.lift_height);
    get_if(e, "grasp_radius", cfg.env.grasp_radius);
    get_if(e, "max_speed_mps", cfg.env.max_speed_mps);
    get_if(e, "reach_scale", cfg.env.reach_scale);
    get_if(e, "success_bonus", cfg.env.success_bonus);
    if (e.contains("depth")) {
      const json& d = e["depth"];
      get_if(d, "noise_enabled", cfg.env.depth.noise_enabled);
      get_if(d, "blur_enabled", cfg.env.depth.blur_enabled);
      get_if(d, "noise_sigma_m", cfg.env.depth.noise_sigma_m);
      get_if(d, "noise_depth_scale", cfg.env.depth.noise_depth_scale);
      get_if(d, "blur_sigma", cfg.env.depth.blur_sigma);
      get_if(d, "blur_kernel", cfg.env.depth.blur_kernel);
      get_if(d, "clip_m", cfg.env.depth.clip_m);
    }
    if (e.contains("palette")) palette_from_json(e["palette"], cfg.env.palette);
    if (e.contains("randomization")) randomization_from_json(e["randomization"], cfg.env.randomization);
  }

  if (j.contains("encoder")) {
    const json& e = j["encoder"];
    get_if(e, "stem_channels", cfg.encoder.stem_channels);
    get_if(e, "stage1_channels", cfg.encoder.stage1_channels);
    get_if(e, "stage2_channels", cfg.encoder.stage2_channels);
    get_if(e, "feature_dim", cfg.encoder.feature_dim);
    get_if(e, "loc_channels", cfg.encoder.loc_channels);
    get_if(e, "loc_hidden", cfg.encoder.loc_hidden);
    get_if(e, "stn_enabled", cfg.encoder.stn_enabled);
  }

  if (j.contains("augment")) {
    const json& a = j["augment"];
    get_if(a, "enabled", cfg.augment.enabled);
    get_if(a, "overlay_alpha", cfg.augment.overlay_alpha);
    get_if(a, "spectrum_mask_fraction", cfg.augment.spectrum_mask_fraction);
    get_if(a, "distractor_dir", cfg.augment.distractor_dir);
  }

  if (j.contains("agent")) {
    const json& a = j["agent"];
    get_if(a, "batch_size", cfg.agent.batch_size);
    get_if(a, "n_step", cfg.agent.n_step);
    get_if(a, "discount", cfg.agent.discount);
    get_if(a, "buffer_capacity", cfg.agent.buffer_capacity);
    get_if(a, "hidden_dim", cfg.agent.hidden_dim);
    get_if(a, "encoder_lr", cfg.agent.encoder_lr);
    get_if(a, "stn_lr", cfg.agent.stn_lr);
    get_if(a, "actor_lr", cfg.agent.actor_lr);
    get_if(a, "critic_lr", cfg.agent.critic_lr);
    get_if(a, "ema_rate", cfg.agent.ema_rate);
    get_if(a, "explore_sigma_start", cfg.agent.explore_sigma_start);
    get_if(a, "explore_sigma_end", cfg.agent.explore_sigma_end);
    get_if(a, "explore_decay_steps", cfg.agent.explore_decay_steps);
    get_if(a, "noise_clip", cfg.agent.noise_clip);
    get_if(a, "temperature", cfg.agent.temperature);
    get_if(a, "lambda", cfg.agent.lambda);
    get_if(a, "normalize_embeddings", cfg.agent.normalize_embeddings);
    get_if(a, "align_grads_into_fixed", cfg.agent.align_grads_into_fixed);
    get_if(a, "align_layers", cfg.agent.align_layers);
    get_if(a, "multiview_enabled", cfg.agent.multiview_enabled);
    get_if(a, "augment_contrastive", cfg.agent.augment_contrastive);
    get_if(a, "threads", cfg.agent.threads);
  }

  if (j.contains("curriculum")) {
    get_if(j["curriculum"], "threshold_step", cfg.curriculum.threshold_step);
    get_if(j["curriculum"], "rate_k", cfg.curriculum.rate_k);
  }

  if (j.contains("train")) {
    const json& t = j["train"];
    get_if(t, "total_steps", cfg.train.total_steps);
    get_if(t, "warmup_steps", cfg.train.warmup_steps);
    get_if(t, "update_every", cfg.train.update_every);
    get_if(t, "log_every", cfg.train.log_every);
    get_if(t, "checkpoint_every", cfg.train.checkpoint_every);
    get_if(t, "eval_every", cfg.train.eval_every);
    get_if(t, "eval_episodes", cfg.train.eval_episodes);
    get_if(t, "save_buffer", cfg.train.save_buffer);
  }

  if (j.contains("eval")) {
    const json& e = j["eval"];
    if (e.contains("yaw_bins_deg")) {
      cfg.eval.yaw_bins_deg.clear();
      for (const auto& b : e["yaw_bins_deg"])
        cfg.eval.yaw_bins_deg.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
    }
    get_if(e, "episodes_per_bin", cfg.eval.episodes_per_bin);
    get_if(e, "smooth_beta", cfg.eval.smooth_beta);
  }

  cfg.resolve();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& ex) {
    throw std::runtime_error("config parse error in " + path + ": " + ex.what());
  }
  return config_from_json(j);
}

void apply_overrides(json& j, const std::vector<std::string>& kvs) {
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("override must be key.path=value: " + kv);
    std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    for (auto& c : key)
      if (c == '.') c = '/';
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (...) {
      parsed = value;  // unquoted strings
    }
    j[json::json_pointer("/" + key)] = parsed;
  }
}

ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport rep;
  auto err = [&rep](const std::string& m) { rep.errors.push_back(m); };
  auto warn = [&rep](const std::string& m) { rep.warnings.push_back(m); };

  if (cfg.task != "reach" && cfg.task != "lift") err("task: must be reach or lift");
  if (cfg.ablate != "none" && cfg.ablate != "no_multiview" && cfg.ablate != "no_stn")
    err("ablate: must be none, no_multiview or no_stn");
  if (cfg.env.image_size < 16) err("env.image_size: must be at least 16");
  if (cfg.env.frame_stack < 1) err("env.frame_stack: must be at least 1");
  if (cfg.env.episode_steps < cfg.agent.n_step + 1)
    err("env.episode_steps: must exceed agent.n_step");
  if (cfg.env.success_radius <= 0) err("env.success_radius: must be positive");

  try {
    cfg.env.randomization.validate();
  } catch (const std::exception& ex) {
    err(std::string("env.randomization: ") + ex.what());
  }

  // documented randomization envelope for the camera angles and timing
  struct Bound {
    const char* name;
    double lo, hi;
  };
  for (const Bound& b : {Bound{"camera_yaw", -60.0, 60.0}, Bound{"camera_pitch", 10.5, 30.5},
                         Bound{"camera_fov", 38.0, 46.0}, Bound{"action_delay", 0.0, 2.0},
                         Bound{"control_timestep", 0.016, 0.024}}) {
    if (!cfg.env.randomization.has(b.name)) {
      err(std::string("env.randomization.") + b.name + ": entry missing");
      continue;
    }
    const auto& e = cfg.env.randomization.at(b.name);
    if (e.lo() < b.lo - 1e-9 || e.hi() > b.hi + 1e-9) {
      std::ostringstream os;
      os << "env.randomization." << b.name << ": range [" << e.lo() << ", " << e.hi()
         << "] exceeds documented bounds [" << b.lo << ", " << b.hi << "]";
      err(os.str());
    }
  }
  for (const char* name : {"camera_distance", "object_size"}) {
    if (cfg.env.randomization.has(name) && cfg.env.randomization.at(name).lo() <= 0)
      err(std::string("env.randomization.") + name + ": range must stay positive");
  }

  if (cfg.agent.temperature <= 0) err("agent.temperature: temperature must be positive");
  if (cfg.agent.lambda < 0) err("agent.lambda: must be non-negative");
  if (cfg.agent.discount < 0 || cfg.agent.discount > 1) err("agent.discount: must be in [0,1]");
  if (cfg.agent.n_step < 1) err("agent.n_step: must be at least 1");
  if (cfg.agent.ema_rate < 0 || cfg.agent.ema_rate > 1) err("agent.ema_rate: must be in [0,1]");
  if (cfg.agent.multiview_enabled && cfg.agent.batch_size < 2)
    err("agent.batch_size: at least 2 required by the contrastive objective");
  for (auto [name, v] : {std::pair<const char*, double>{"encoder_lr", cfg.agent.encoder_lr},
                         {"stn_lr", cfg.agent.stn_lr},
                         {"actor_lr", cfg.agent.actor_lr},
                         {"critic_lr", cfg.agent.critic_lr}})
    if (v <= 0) err(std::string("agent.") + name + ": must be positive");
  for (const auto& tag : cfg.agent.align_layers)
    if (tag != "stn" && tag != "stage1" && tag != "stage2")
      err("agent.align_layers: unknown layer tag " + tag);

  if (cfg.augment.overlay_alpha < 0 || cfg.augment.overlay_alpha > 1)
    err("augment.overlay_alpha: must be in [0,1]");
  if (cfg.augment.spectrum_mask_fraction < 0 || cfg.augment.spectrum_mask_fraction > 1)
    err("augment.spectrum_mask_fraction: must be in [0,1]");

  if (cfg.curriculum.rate_k < 0) err("curriculum.rate_k: must be non-negative");
  if (cfg.curriculum.threshold_step >= cfg.train.total_steps)
    warn("curriculum never activates: threshold_step >= train.total_steps");

  if (cfg.train.total_steps < 1) err("train.total_steps: must be positive");
  if (cfg.train.update_every < 1) err("train.update_every: must be at least 1");
  if (cfg.agent.threads < 1) err("agent.threads: must be at least 1");

  if (cfg.eval.episodes_per_bin < 1) err("eval.episodes_per_bin: must be at least 1");
  for (auto& [lo, hi] : cfg.eval.yaw_bins_deg) {
    if (lo < 0 || hi > 60 || lo >= hi) err("eval.yaw_bins_deg: bins must be within [0,60]");
  }
  return rep;
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  std::ostringstream os;
  os << std::hex << fnv1a64_str(dump);
  return os.str();
}

}  // namespace mvrl::cli
