#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mvrl/cli/evalcmd.hpp"
#include "mvrl/cli/train.hpp"
#include "mvrl/eval/evalkit.hpp"
#include "mvrl/eval/plots.hpp"

namespace fs = std::filesystem;
using namespace mvrl;

namespace {

cli::ExperimentConfig load_with_overrides(const std::string& config_path,
                                          const std::vector<std::string>& sets) {
  cli::json j = cli::json::object();
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot open config: " + config_path);
    f >> j;
  }
  cli::apply_overrides(j, sets);
  return cli::config_from_json(j);
}

sim::FrameStack render_stack(const cli::ExperimentConfig& cfg, double yaw_deg, uint64_t seed) {
  sim::ToyManipEnv env(cfg.env);
  sim::RandomizationSpec spec = cfg.env.randomization;
  spec.entries["camera_yaw"] = {yaw_deg, 0.0, false};
  return env.reset(spec, 0.0, seed).moving;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view visual RL testbed"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, out, query, poses_arg, sweep = "viewpoint";
  std::string policy = "trained";
  std::vector<std::string> sets;
  bool resume = false;
  std::string ablate;
  int episodes = 0;
  uint64_t seed_arg = 7;
  double yaw_a = -40.0, yaw_b = 40.0;
  int steps_arg = 40;

  auto* t = app.add_subcommand("train", "run the training loop");
  t->add_option("--config", config_path, "config file (json)");
  t->add_option("--set", sets, "override config fields, key.path=value");
  t->add_option("--ablate", ablate, "none | no_multiview | no_stn");
  t->add_flag("--resume", resume, "resume from the newest checkpoint in out_dir");

  auto* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  e->add_option("--out", out, "output directory");
  e->add_option("--sweep", sweep, "viewpoint | appearance | both");
  e->add_option("--policy", policy, "trained | random | oracle");
  e->add_option("--episodes", episodes, "episodes per condition");
  e->add_option("--seed", seed_arg, "evaluation seed");

  auto* v = app.add_subcommand("validate", "validate a config file");
  v->add_option("--config", config_path, "config file (json)")->required();
  v->add_option("--set", sets, "override config fields");

  auto* x = app.add_subcommand("export-embeddings", "dump embeddings along a trajectory");
  x->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  x->add_option("--out", out, "output .tsv path")->required();
  x->add_option("--poses", poses_arg, "comma-separated yaw angles, default -40,0,40");
  x->add_option("--steps", steps_arg, "trajectory length");
  x->add_option("--seed", seed_arg, "seed");

  auto* c = app.add_subcommand("correspondence", "feature correspondence between two views");
  c->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  c->add_option("--out", out, "output png path")->required();
  c->add_option("--yaw-a", yaw_a, "view A yaw (deg)");
  c->add_option("--yaw-b", yaw_b, "view B yaw (deg)");
  c->add_option("--query", query, "query pixel x,y (defaults to the object center)");
  c->add_option("--seed", seed_arg, "seed");

  auto* a = app.add_subcommand("attention", "value-gradient attention map");
  a->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  a->add_option("--out", out, "output png path")->required();
  a->add_option("--yaw-a", yaw_a, "camera yaw (deg)");
  a->add_option("--seed", seed_arg, "seed");

  auto* r = app.add_subcommand("render", "render the canonical scene to png");
  r->add_option("--config", config_path, "config file (json)");
  r->add_option("--set", sets, "override config fields");
  r->add_option("--out", out, "output png path")->required();
  r->add_option("--seed", seed_arg, "episode seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (t->parsed()) {
      cli::ExperimentConfig cfg = load_with_overrides(config_path, sets);
      if (!ablate.empty()) cfg.ablate = ablate;
      cfg.resolve();
      const auto res = cli::train(cfg, resume, &std::cout);
      std::cout << "run dir: " << res.run_dir << "\n"
                << "checkpoint: " << res.last_checkpoint << "\n";
    } else if (e->parsed()) {
      cli::EvalCommandOptions opt;
      opt.checkpoint = checkpoint;
      opt.out_dir = out;
      opt.sweep = sweep;
      opt.policy = policy;
      opt.episodes = episodes;
      opt.seed = seed_arg;
      for (const auto& path : cli::run_eval_command(opt)) std::cout << path << "\n";
    } else if (v->parsed()) {
      const cli::ExperimentConfig cfg = load_with_overrides(config_path, sets);
      const auto rep = cli::validate_config(cfg);
      for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
      if (rep.ok()) {
        std::cout << "ok\n";
      } else {
        for (const auto& err : rep.errors) std::cout << "error: " << err << "\n";
        return 1;
      }
    } else if (x->parsed()) {
      cli::ExperimentConfig cfg;
      auto agent = cli::agent_from_checkpoint(checkpoint, &cfg);
      std::vector<sim::CameraPose> poses;
      std::string arg = poses_arg.empty() ? "-40,0,40" : poses_arg;
      std::stringstream ss(arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        sim::CameraPose p = sim::midpoint_camera_pose(cfg.env.randomization);
        p.yaw_deg = std::stod(tok);
        poses.push_back(p);
      }
      const auto traj = eval::record_trajectory(cfg, agent.get(), eval::PolicyKind::kTrained,
                                                seed_arg, steps_arg);
      const auto rows = eval::export_embeddings(cfg, *agent, traj, poses, seed_arg);
      eval::write_embedding_table(rows, out);
      std::cout << out << " (" << rows.size() << " rows)\n";
    } else if (c->parsed()) {
      cli::ExperimentConfig cfg;
      auto agent = cli::agent_from_checkpoint(checkpoint, &cfg);
      const sim::FrameStack sa = render_stack(cfg, yaw_a, seed_arg);
      const sim::FrameStack sb = render_stack(cfg, yaw_b, seed_arg);
      std::pair<int, int> q{cfg.env.image_size / 2, cfg.env.image_size / 2};
      if (!query.empty()) {
        const auto comma = query.find(',');
        q = {std::stoi(query.substr(0, comma)), std::stoi(query.substr(comma + 1))};
      }
      const auto res = eval::correspondence_map(*agent, sa, q, sb);
      PlaneF m01 = res.similarity;
      for (auto& v : m01.data) v = 0.5f * (v + 1.f);
      eval::write_heat_png(m01, out);
      std::cout << out << " argmax " << res.argmax.first << "," << res.argmax.second << "\n";
    } else if (a->parsed()) {
      cli::ExperimentConfig cfg;
      auto agent = cli::agent_from_checkpoint(checkpoint, &cfg);
      const sim::FrameStack s = render_stack(cfg, yaw_a, seed_arg);
      eval::write_heat_png(eval::attention_map(*agent, s), out);
      std::cout << out << "\n";
    } else if (r->parsed()) {
      cli::ExperimentConfig cfg = load_with_overrides(config_path, sets);
      cfg.resolve();
      sim::ToyManipEnv env(cfg.env);
      env.reset(cfg.env.randomization, 0.0, seed_arg);
      const sim::RenderOut ro = env.render(env.state(), env.fixed_pose());
      Image8 rgba(ro.rgb.width, ro.rgb.height, 4);
      const Image8 depth = sim::preprocess_depth(ro.depth_m, uint64_t(0),
                                                 [&] {
                                                   sim::DepthConfig d = cfg.env.depth;
                                                   d.noise_enabled = false;
                                                   d.blur_enabled = false;
                                                   return d;
                                                 }());
      for (size_t i = 0; i < size_t(ro.rgb.width) * ro.rgb.height; ++i) {
        rgba.data[4 * i + 0] = ro.rgb.data[3 * i + 0];
        rgba.data[4 * i + 1] = ro.rgb.data[3 * i + 1];
        rgba.data[4 * i + 2] = ro.rgb.data[3 * i + 2];
        rgba.data[4 * i + 3] = depth.data[i];
      }
      write_png(out, rgba);
      std::cout << out << "\n";
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
