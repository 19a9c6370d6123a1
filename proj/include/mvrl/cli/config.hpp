#pragma once

#include <string>
#include <vector>

#include "json.hpp"  // vendored nlohmann/json

#include "mvrl/agent/agent.hpp"
#include "mvrl/curriculum/curriculum.hpp"

namespace mvrl::cli {

using json = nlohmann::json;

struct TrainConfig {
  int64_t total_steps = 300000;
  int64_t warmup_steps = 1000;
  int update_every = 2;
  int64_t log_every = 1;
  int64_t checkpoint_every = 25000;
  int64_t eval_every = 0;  // env steps; 0 disables in-loop eval
  int eval_episodes = 10;
  bool save_buffer = true;
};

struct CurriculumConfig {
  int64_t threshold_step = 50000;
  double rate_k = 0.0;  // 0 -> derived: 0.95 magnitude at 3x threshold
};

struct EvalConfig {
  std::vector<std::pair<double, double>> yaw_bins_deg{{0, 15}, {20, 35}, {45, 60}};
  int episodes_per_bin = 20;
  double smooth_beta = 0.0;
};

struct ExperimentConfig {
  std::string task = "reach";
  uint64_t seed = 1;
  std::string out_dir = "runs/default";
  std::string ablate = "none";  // none | no_multiview | no_stn
  sim::EnvConfig env;
  encoder::EncoderConfig encoder;
  augment::AugmentConfig augment;
  agent::AgentConfig agent;
  CurriculumConfig curriculum;
  TrainConfig train;
  EvalConfig eval;

  // Propagates cross-module fields (task -> action dim, image size ->
  // encoder geometry, ablation switches) so modules never disagree.
  void resolve();
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

ExperimentConfig default_config();
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::string& path);
void apply_overrides(json& j, const std::vector<std::string>& key_value_pairs);

ValidationReport validate_config(const ExperimentConfig& cfg);

// Fingerprint of the fully resolved config; stored in run dirs, checkpoints
// and reports so artifacts can be matched to the exact configuration.
std::string config_fingerprint(const ExperimentConfig& cfg);

}  // namespace mvrl::cli
