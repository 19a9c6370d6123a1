#pragma once

#include <memory>
#include <optional>
#include <string>

#include "mvrl/agent/nets.hpp"
#include "mvrl/agent/replay.hpp"
#include "mvrl/augment/augment.hpp"
#include "mvrl/curriculum/curriculum.hpp"
#include "mvrl/encoder/encoder.hpp"
#include "mvrl/nn/adam.hpp"
#include "mvrl/objectives/losses.hpp"

namespace mvrl::agent {

struct AgentConfig {
  int action_dim = 2;
  int batch_size = 256;
  int n_step = 3;
  double discount = 0.99;
  size_t buffer_capacity = 10000000;
  int hidden_dim = 256;
  double encoder_lr = 1e-4;
  double stn_lr = 1e-4;
  double actor_lr = 1e-4;
  double critic_lr = 1e-4;
  double ema_rate = 0.01;
  double explore_sigma_start = 0.5;
  double explore_sigma_end = 0.1;
  int64_t explore_decay_steps = 10000;
  double noise_clip = 0.5;
  // objectives
  double temperature = 0.1;
  double lambda = 200.0;
  bool normalize_embeddings = true;
  bool align_grads_into_fixed = true;
  std::vector<std::string> align_layers{"stn", "stage1", "stage2"};
  bool multiview_enabled = true;  // Eq.-style representation objective on/off
  bool augment_contrastive = false;
  int threads = 1;
};

using LossBundleF = objectives::LossBundle<float>;

// Visual actor-critic with a shared encoder, twin critics and EMA targets.
// Updates combine the TD regression on augmented inputs with the multi-view
// representation objective in a single backward pass; the actor step keeps
// encoder parameters frozen.
class Agent {
 public:
  Agent(AgentConfig cfg, encoder::EncoderConfig enc_cfg, augment::AugmentConfig aug_cfg,
        uint64_t seed);

  // Single-view inference; exploration adds clipped gaussian noise.
  Eigen::VectorXf act(const sim::FrameStack& obs, bool explore, Rng& rng);
  Eigen::VectorXf act(const sim::MultiViewObservation&, bool, Rng&) = delete;

  LossBundleF update(const SampledBatch& batch, const curriculum::CurriculumState& cur, Rng& rng);

  // beta * prev + (1 - beta) * raw
  static Eigen::VectorXd smooth_action(const Eigen::VectorXd& raw,
                                       const Eigen::VectorXd& prev_smoothed, double beta);

  void set_explore_sigma(double s) { explore_sigma_ = s; }
  double explore_sigma_for_step(int64_t step) const;

  const encoder::Encoder<float>& enc() const { return encoder_; }
  encoder::Encoder<float>& enc() { return encoder_; }
  const AgentConfig& config() const { return cfg_; }
  const augment::AugmentConfig& augment_config() const { return aug_cfg_; }
  const augment::DistractorSource& distractors() const { return distractors_; }

  encoder::FeaturePyramid<float> encode(const sim::FrameStack& obs) const;
  Eigen::VectorXf critic_penultimate(const Eigen::VectorXf& emb, const Eigen::VectorXf& action) const;
  float q_value(const Eigen::VectorXf& emb, const Eigen::VectorXf& action) const;
  Eigen::VectorXf policy_action(const Eigen::VectorXf& emb) const;

  // gradient of Q1(emb, actor(emb)) w.r.t. the stage2 feature map
  nn::FeatureMap<float> value_gradient_stage2(const sim::FrameStack& obs) const;

  void save(BinWriter& w) const;
  void load(BinReader& r);
  int64_t updates_done() const { return updates_; }

  // exact-EMA check support
  std::vector<nn::TensorRef<float>> target_params();
  std::vector<nn::TensorRef<float>> online_params();

 private:
  void ema_update();

  AgentConfig cfg_;
  encoder::EncoderConfig enc_cfg_;
  augment::AugmentConfig aug_cfg_;
  augment::DistractorSource distractors_;

  encoder::Encoder<float> encoder_, encoder_grad_;
  Actor<float> actor_, actor_grad_, actor_target_;
  Critic<float> critic1_, critic2_, critic1_grad_, critic2_grad_;
  Critic<float> critic1_target_, critic2_target_;

  nn::Adam<float> opt_encoder_, opt_stn_, opt_actor_, opt_critic_;
  double explore_sigma_ = 0.5;
  int64_t updates_ = 0;
};

}  // namespace mvrl::agent
