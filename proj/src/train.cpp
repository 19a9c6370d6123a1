#include "mvrl/cli/train.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mvrl/eval/evalkit.hpp"

namespace mvrl::cli {

namespace fs = std::filesystem;

namespace {

constexpr uint64_t kCkptMagic = 0x4d56524c434b5031ull;  // "MVRLCKP1"

void write_rng(BinWriter& w, const Rng& r) {
  for (uint64_t s : r.state()) w.u64(s);
}

Rng read_rng(BinReader& r) {
  std::array<uint64_t, 4> st;
  for (auto& s : st) s = r.u64();
  Rng rng;
  rng.set_state(st);
  return rng;
}

// drops log records past the resume point so the continued run never
// duplicates a step
void truncate_jsonl(const std::string& path, const char* step_key, int64_t max_step) {
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  std::vector<std::string> keep;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains(step_key) && j[step_key].get<int64_t>() > max_step) continue;
    } catch (...) {
    }
    keep.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << "\n";
}

struct EpisodeAccum {
  agent::Episode ep;
  double episode_return = 0.0;

  void start(const sim::MultiViewObservation& obs) {
    ep = agent::Episode{};
    episode_return = 0.0;
    ep.fixed_frames.push_back(obs.fixed.newest());
    ep.moving_frames.push_back(obs.moving.newest());
  }

  void step(const Eigen::VectorXf& a, const sim::StepResult& r, double gamma) {
    ep.actions.push_back(a);
    ep.rewards.push_back(r.reward);
    ep.discounts.push_back(r.success ? 0.0 : gamma);
    ep.fixed_frames.push_back(r.obs.fixed.newest());
    ep.moving_frames.push_back(r.obs.moving.newest());
    ep.success = ep.success || r.success;
    episode_return += r.reward;
  }
};

}  // namespace

uint64_t episode_seed(uint64_t run_seed, int64_t episode_idx) {
  uint64_t buf[2] = {run_seed, uint64_t(episode_idx)};
  return fnv1a64(buf, sizeof(buf));
}

TrainResult train(ExperimentConfig cfg, bool resume, std::ostream* progress) {
  cfg.resolve();
  const ValidationReport rep = validate_config(cfg);
  if (!rep.ok()) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& e : rep.errors) os << "\n  - " << e;
    throw std::runtime_error(os.str());
  }

  const fs::path run_dir(cfg.out_dir);
  const fs::path ckpt_dir = run_dir / "checkpoints";
  fs::create_directories(ckpt_dir);

  const std::string fingerprint = config_fingerprint(cfg);
  const fs::path cfg_path = run_dir / "resolved_config.json";
  if (fs::exists(cfg_path)) {
    std::ifstream f(cfg_path);
    json stored;
    f >> stored;
    const std::string stored_fp = config_fingerprint(config_from_json(stored));
    if (stored_fp != fingerprint)
      throw std::runtime_error("run directory holds a different config (fingerprint " + stored_fp +
                               " vs " + fingerprint + "); refusing to " +
                               (resume ? "resume" : "overwrite"));
  } else {
    std::ofstream f(cfg_path);
    f << config_to_json(cfg).dump(2) << "\n";
  }

  sim::ToyManipEnv env(cfg.env);
  agent::ReplayBuffer buffer(cfg.agent.buffer_capacity, cfg.agent.n_step, cfg.env.frame_stack);
  agent::Agent agent(cfg.agent, cfg.encoder, cfg.augment, cfg.seed);

  curriculum::CurriculumState cur;
  cur.threshold_step = cfg.curriculum.threshold_step;
  cur.rate_k = cfg.curriculum.rate_k;

  Rng master(cfg.seed);
  Rng explore_rng = master.fork(1);
  Rng sample_rng = master.fork(2);
  Rng update_rng = master.fork(3);

  int64_t env_step = 0, episode_idx = 0, update_idx = 0;

  if (resume) {
    const std::string last = latest_checkpoint(cfg.out_dir);
    if (last.empty()) throw std::runtime_error("resume requested but no checkpoint in " + cfg.out_dir);
    BinReader r(last);
    CheckpointHead head = load_checkpoint_head(r);
    if (head.fingerprint != fingerprint)
      throw std::runtime_error("checkpoint config fingerprint mismatch; refusing to resume");
    env_step = head.env_step;
    episode_idx = head.episode_idx;
    update_idx = head.update_idx;
    explore_rng = read_rng(r);
    sample_rng = read_rng(r);
    update_rng = read_rng(r);
    agent.load(r);
    const std::string buf_path = last + ".buf";
    if (fs::exists(buf_path)) {
      BinReader br(buf_path);
      buffer.load(br);
    }
    truncate_jsonl((run_dir / "metrics.jsonl").string(), "env_step", env_step);
    truncate_jsonl((run_dir / "episodes.jsonl").string(), "env_step", env_step);
  }

  std::ofstream metrics(run_dir / "metrics.jsonl", std::ios::app);
  std::ofstream episodes(run_dir / "episodes.jsonl", std::ios::app);

  auto save_checkpoint = [&](int64_t at_step) -> std::string {
    std::ostringstream name;
    name << "ckpt_" << at_step << ".bin";
    const std::string path = (ckpt_dir / name.str()).string();
    BinWriter w(path);
    w.u64(kCkptMagic);
    w.str(fingerprint);
    w.str(config_to_json(cfg).dump());
    w.i64(at_step);
    w.i64(episode_idx);
    w.i64(update_idx);
    write_rng(w, explore_rng);
    write_rng(w, sample_rng);
    write_rng(w, update_rng);
    agent.save(w);
    if (cfg.train.save_buffer) {
      BinWriter bw(path + ".buf");
      buffer.save(bw);
    }
    std::ofstream latest(ckpt_dir / "LATEST", std::ios::trunc);
    latest << name.str() << "\n";
    return path;
  };

  auto run_inline_eval = [&](int64_t at_step) {
    const uint64_t seed = fnv1a64_str("eval" + std::to_string(at_step) + ":" +
                                      std::to_string(cfg.seed));
    sim::ToyManipEnv eval_env(cfg.env);
    Rng eval_rng(seed);
    int succ = 0;
    double ret = 0.0;
    cur.advance_to(at_step);
    for (int e = 0; e < cfg.train.eval_episodes; ++e) {
      const auto out = eval::run_eval_episode(eval_env, cfg.env.randomization, cur.magnitude,
                                              &agent, eval::PolicyKind::kTrained,
                                              eval_rng.next_u64());
      succ += out.success ? 1 : 0;
      ret += out.episode_return;
    }
    json j;
    j["kind"] = "eval";
    j["env_step"] = at_step;
    j["success_rate"] = double(succ) / std::max(1, cfg.train.eval_episodes);
    j["mean_return"] = ret / std::max(1, cfg.train.eval_episodes);
    j["magnitude"] = cur.magnitude;
    metrics << j.dump() << "\n";
    metrics.flush();
    if (progress)
      (*progress) << "eval @" << at_step << ": success " << j["success_rate"].dump() << "\n";
  };

  int64_t last_ckpt_step = env_step;
  int64_t last_eval_step = env_step;
  std::string last_ckpt_path = latest_checkpoint(cfg.out_dir);

  while (env_step < cfg.train.total_steps) {
    cur.advance_to(env_step);
    const uint64_t ep_seed = episode_seed(cfg.seed, episode_idx);
    sim::MultiViewObservation obs = env.reset(cfg.env.randomization, cur.magnitude, ep_seed);

    EpisodeAccum acc;
    acc.start(obs);

    while (!env.done() && env_step < cfg.train.total_steps) {
      cur.advance_to(env_step);
      agent.set_explore_sigma(agent.explore_sigma_for_step(env_step));

      Eigen::VectorXf a(cfg.agent.action_dim);
      if (env_step < cfg.train.warmup_steps) {
        for (int i = 0; i < cfg.agent.action_dim; ++i) a[i] = float(explore_rng.uniform(-1, 1));
      } else {
        const bool use_move = cur.aug_view() == curriculum::AugView::kMoving;
        a = agent.act(use_move ? obs.moving : obs.fixed, /*explore=*/true, explore_rng);
      }

      const sim::StepResult r = env.step(a.cast<double>());
      acc.step(a, r, cfg.agent.discount);
      obs = r.obs;
      env_step += 1;

      if (env_step >= cfg.train.warmup_steps && env_step % cfg.train.update_every == 0 &&
          buffer.valid_windows() > 0) {
        const agent::SampledBatch batch = buffer.sample(cfg.agent.batch_size, sample_rng);
        cur.advance_to(env_step);
        const agent::LossBundleF bundle = agent.update(batch, cur, update_rng);
        update_idx += 1;
        if (update_idx % cfg.train.log_every == 0) {
          json j;
          j["update"] = update_idx;
          j["env_step"] = env_step;
          j["j_con"] = double(bundle.j_con);
          j["j_feat"] = double(bundle.j_feat);
          j["total_rep"] = double(bundle.total_rep);
          j["q_loss"] = double(bundle.q_loss);
          j["actor_loss"] = double(bundle.actor_loss);
          j["magnitude"] = cur.magnitude;
          j["aug_view"] = cur.aug_view() == curriculum::AugView::kFixed ? "fixed" : "moving";
          for (const auto& [k, v] : bundle.diagnostics) j[k] = v;
          metrics << j.dump() << "\n";
        }
      }
    }

    buffer.add_episode(std::move(acc.ep));
    {
      json j;
      j["episode"] = episode_idx;
      j["env_step"] = env_step;
      j["return"] = acc.episode_return;
      j["success"] = env.last_success();
      j["magnitude"] = cur.magnitude;
      episodes << j.dump() << "\n";
    }
    episode_idx += 1;

    if (progress && episode_idx % 25 == 0) {
      (*progress) << "step " << env_step << "/" << cfg.train.total_steps << " episodes "
                  << episode_idx << " updates " << update_idx << " magnitude " << cur.magnitude
                  << "\n";
      progress->flush();
    }

    if (cfg.train.eval_every > 0 && env_step - last_eval_step >= cfg.train.eval_every) {
      run_inline_eval(env_step);
      last_eval_step = env_step;
    }
    if (env_step - last_ckpt_step >= cfg.train.checkpoint_every) {
      last_ckpt_path = save_checkpoint(env_step);
      last_ckpt_step = env_step;
    }
    metrics.flush();
    episodes.flush();
  }

  last_ckpt_path = save_checkpoint(env_step);

  TrainResult out;
  out.run_dir = cfg.out_dir;
  out.last_checkpoint = last_ckpt_path;
  out.env_steps = env_step;
  out.updates = update_idx;
  return out;
}

std::string latest_checkpoint(const std::string& run_dir) {
  const fs::path latest = fs::path(run_dir) / "checkpoints" / "LATEST";
  if (!fs::exists(latest)) return "";
  std::ifstream f(latest);
  std::string name;
  f >> name;
  if (name.empty()) return "";
  return (fs::path(run_dir) / "checkpoints" / name).string();
}

CheckpointHead load_checkpoint_head(BinReader& r) {
  if (r.u64() != kCkptMagic) throw std::runtime_error("not a checkpoint file");
  CheckpointHead head;
  head.fingerprint = r.str();
  head.cfg = config_from_json(json::parse(r.str()));
  head.env_step = r.i64();
  head.episode_idx = r.i64();
  head.update_idx = r.i64();
  return head;
}

std::unique_ptr<agent::Agent> agent_from_checkpoint(const std::string& path,
                                                    ExperimentConfig* cfg_out) {
  BinReader r(path);
  CheckpointHead head = load_checkpoint_head(r);
  read_rng(r);
  read_rng(r);
  read_rng(r);
  auto agent = std::make_unique<agent::Agent>(head.cfg.agent, head.cfg.encoder, head.cfg.augment,
                                              head.cfg.seed);
  agent->load(r);
  if (cfg_out) *cfg_out = head.cfg;
  return agent;
}

}  // namespace mvrl::cli
