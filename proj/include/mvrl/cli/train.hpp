#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "mvrl/cli/config.hpp"

namespace mvrl::cli {

struct TrainResult {
  std::string run_dir;
  std::string last_checkpoint;
  int64_t env_steps = 0;
  int64_t updates = 0;
};

// Runs the full loop (collect -> replay -> update, curriculum-driven) to
// cfg.train.total_steps. The run directory is self-describing: resolved
// config, metrics/episode logs, checkpoints. Resume picks up from the
// newest checkpoint and refuses a changed config.
TrainResult train(ExperimentConfig cfg, bool resume = false, std::ostream* progress = nullptr);

std::string latest_checkpoint(const std::string& run_dir);

struct CheckpointHead {
  std::string fingerprint;
  ExperimentConfig cfg;
  int64_t env_step = 0;
  int64_t episode_idx = 0;
  int64_t update_idx = 0;
};

// Loads config + agent parameters from a checkpoint written by train().
CheckpointHead load_checkpoint_head(BinReader& r);
std::unique_ptr<agent::Agent> agent_from_checkpoint(const std::string& path,
                                                    ExperimentConfig* cfg_out = nullptr);

uint64_t episode_seed(uint64_t run_seed, int64_t episode_idx);

}  // namespace mvrl::cli
