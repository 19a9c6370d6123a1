#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvrl/agent/agent.hpp"
#include "mvrl/cli/config.hpp"

namespace mvrl::eval {

struct ConditionResult {
  std::string name;
  int episodes = 0;
  int successes = 0;
  double mean_return = 0.0;
  double rate() const { return episodes ? double(successes) / episodes : 0.0; }
};

struct EvalReport {
  std::string kind;  // viewpoint | appearance
  std::string task;
  std::string fingerprint;
  std::string policy;  // trained | random | oracle
  std::string ablate = "none";
  uint64_t seed = 0;
  std::vector<ConditionResult> conditions;

  double mean_rate() const;
  cli::json to_json() const;
  std::string to_text() const;
  // writes <prefix>.json and <prefix>.txt
  void save(const std::string& prefix) const;
};

enum class PolicyKind { kTrained, kRandom, kOracle };

// Single evaluation episode. The policy consumes only the moving-camera view;
// the camera ranges inside `spec` define where that camera may appear.
struct EpisodeOutcome {
  bool success = false;
  double episode_return = 0.0;
  int steps = 0;
};
EpisodeOutcome run_eval_episode(sim::ToyManipEnv& env, const sim::RandomizationSpec& spec,
                                double magnitude, agent::Agent* agent, PolicyKind kind,
                                uint64_t seed, double smooth_beta = 0.0);

// Success per absolute-yaw bin; pitch/fov/distance and physics are drawn from
// their full ranges. Bin entries sample |yaw| in [lo,hi] with a random side.
EvalReport viewpoint_sweep(const cli::ExperimentConfig& cfg, agent::Agent* agent, PolicyKind kind,
                           const std::vector<std::pair<double, double>>& yaw_bins_deg,
                           int episodes_per_bin, uint64_t seed);

struct PaletteCondition {
  std::string name;
  sim::Palette palette;
  bool recolors_target = false;  // target-object recolors are reported apart
  double overlay_alpha = 1.0;    // < 1 blends a distractor texture over frames
};
std::vector<PaletteCondition> builtin_palettes();

EvalReport appearance_sweep(const cli::ExperimentConfig& cfg, agent::Agent* agent, PolicyKind kind,
                            const std::vector<PaletteCondition>& palettes, int episodes,
                            uint64_t seed);

// Rolls the trained policy once and records the visited states.
std::vector<sim::EnvState> record_trajectory(const cli::ExperimentConfig& cfg, agent::Agent* agent,
                                             PolicyKind kind, uint64_t seed, int max_steps);

struct EmbeddingRow {
  int timestep = 0;
  int pose_id = 0;
  uint64_t state_hash = 0;
  Eigen::VectorXf embedding;
  Eigen::VectorXf critic_penultimate;
};

// Renders every recorded state from every pose (temporal frame stacks are
// maintained per pose) and dumps encoder embeddings plus the critic's
// penultimate activations.
std::vector<EmbeddingRow> export_embeddings(const cli::ExperimentConfig& cfg, agent::Agent& agent,
                                            const std::vector<sim::EnvState>& trajectory,
                                            const std::vector<sim::CameraPose>& poses,
                                            uint64_t seed);
void write_embedding_table(const std::vector<EmbeddingRow>& rows, const std::string& path);

struct CorrespondenceResult {
  PlaneF similarity;           // image resolution, values in [-1, 1]
  std::pair<int, int> argmax;  // pixel in image B
  std::pair<int, int> query_cell;
  float peak_similarity = 0.f;  // cell-level maximum, before upsampling
  std::string layer;
};

CorrespondenceResult correspondence_map(const agent::Agent& agent, const sim::FrameStack& image_a,
                                        std::pair<int, int> query_pixel,
                                        const sim::FrameStack& image_b,
                                        const std::string& layer = "stage1");

// Gradient-weighted activation map of the critic value, in [0,1] at image
// resolution.
PlaneF attention_map(const agent::Agent& agent, const sim::FrameStack& obs);

PlaneF upsample_bilinear(const PlaneF& src, int w, int h);
void write_heat_png(const PlaneF& map01, const std::string& path);

}  // namespace mvrl::eval
