#pragma once

#include <Eigen/Dense>
#include <deque>
#include <vector>

#include "mvrl/core/rng.hpp"
#include "mvrl/core/serialize.hpp"
#include "mvrl/sim/env.hpp"

namespace mvrl::agent {

// One finished episode: T transitions and T+1 paired frames. The per-step
// discount is gamma, or 0 at a true terminal.
struct Episode {
  int64_t id = 0;
  std::vector<Image8> fixed_frames, moving_frames;
  std::vector<Eigen::VectorXf> actions;
  std::vector<double> rewards;
  std::vector<double> discounts;
  bool success = false;

  size_t transitions() const { return actions.size(); }
};

struct SampledBatch {
  std::vector<sim::FrameStack> fixed_t, moving_t;
  std::vector<sim::FrameStack> fixed_tn, moving_tn;  // observations at t+n
  std::vector<Eigen::VectorXf> actions;
  std::vector<std::vector<double>> reward_windows;
  std::vector<std::vector<double>> discount_windows;
  std::vector<int64_t> episode_ids;
  std::vector<int> start_indices;

  size_t size() const { return actions.size(); }
};

// FIFO episode store with uniform sampling over valid n-step windows; windows
// never span episode boundaries.
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity_transitions, int n_step, int frame_stack);

  void add_episode(Episode ep);
  SampledBatch sample(int batch_size, Rng& rng) const;

  // stack of the `frame_stack` most recent frames at index t, front-padded
  sim::FrameStack stack_at(const Episode& ep, bool moving, int t) const;

  size_t transitions() const { return transitions_; }
  size_t valid_windows() const;
  size_t episodes() const { return episodes_.size(); }
  const std::deque<Episode>& episode_store() const { return episodes_; }
  int n_step() const { return n_step_; }

  void save(BinWriter& w) const;
  void load(BinReader& r);

 private:
  std::deque<Episode> episodes_;
  size_t capacity_ = 0;
  size_t transitions_ = 0;
  int n_step_ = 3;
  int frame_stack_ = 3;
  int64_t next_id_ = 0;
};

}  // namespace mvrl::agent
