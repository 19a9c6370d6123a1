#include "mvrl/cli/evalcmd.hpp"

#include <filesystem>
#include <stdexcept>

#include "mvrl/cli/train.hpp"
#include "mvrl/eval/evalkit.hpp"
#include "mvrl/eval/plots.hpp"

namespace mvrl::cli {

namespace fs = std::filesystem;

namespace {

void write_report_files(const eval::EvalReport& rep, const fs::path& out_dir,
                        const std::string& stem, std::vector<std::string>& written) {
  fs::create_directories(out_dir);
  const std::string prefix = (out_dir / stem).string();
  rep.save(prefix);
  written.push_back(prefix + ".json");
  written.push_back(prefix + ".txt");

  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& c : rep.conditions) {
    labels.push_back(c.name);
    values.push_back(c.rate());
  }
  const std::string title = rep.kind + " success - " + rep.task + " (" + rep.policy + ")";
  write_png(prefix + "_bar.png", eval::bar_chart(title, labels, values));
  write_png(prefix + "_line.png", eval::line_chart(title, labels, values));
  written.push_back(prefix + "_bar.png");
  written.push_back(prefix + "_line.png");
}

}  // namespace

std::vector<std::string> run_eval_command(const EvalCommandOptions& opt) {
  ExperimentConfig cfg;
  std::unique_ptr<agent::Agent> agent;
  eval::PolicyKind kind = eval::PolicyKind::kTrained;
  if (opt.policy == "random")
    kind = eval::PolicyKind::kRandom;
  else if (opt.policy == "oracle")
    kind = eval::PolicyKind::kOracle;
  else if (opt.policy != "trained")
    throw std::runtime_error("unknown policy kind: " + opt.policy);

  agent = agent_from_checkpoint(opt.checkpoint, &cfg);
  const int episodes = opt.episodes > 0 ? opt.episodes : cfg.eval.episodes_per_bin;

  const fs::path out_dir =
      opt.out_dir.empty() ? fs::path(opt.checkpoint).parent_path() / "eval" : fs::path(opt.out_dir);

  std::vector<std::string> written;
  if (opt.sweep == "viewpoint" || opt.sweep == "both") {
    const auto rep = eval::viewpoint_sweep(cfg, agent.get(), kind, cfg.eval.yaw_bins_deg, episodes,
                                           opt.seed);
    write_report_files(rep, out_dir, "viewpoint_" + opt.policy, written);
  }
  if (opt.sweep == "appearance" || opt.sweep == "both") {
    const auto rep = eval::appearance_sweep(cfg, agent.get(), kind, eval::builtin_palettes(),
                                            episodes, opt.seed);
    write_report_files(rep, out_dir, "appearance_" + opt.policy, written);
  }
  if (written.empty()) throw std::runtime_error("unknown sweep kind: " + opt.sweep);
  return written;
}

}  // namespace mvrl::cli
