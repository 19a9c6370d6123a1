#pragma once

#include <string>
#include <vector>

#include "mvrl/cli/config.hpp"

namespace mvrl::cli {

struct EvalCommandOptions {
  std::string checkpoint;
  std::string out_dir;
  std::string sweep = "viewpoint";  // viewpoint | appearance | both
  std::string policy = "trained";   // trained | random | oracle
  int episodes = 0;                 // 0 -> use the config default
  uint64_t seed = 7;
};

// Dispatches evaluation sweeps for a checkpoint and writes report + plot
// files into out_dir; returns the written paths.
std::vector<std::string> run_eval_command(const EvalCommandOptions& opt);

}  // namespace mvrl::cli
