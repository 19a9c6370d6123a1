#include "mvrl/agent/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mvrl::agent {

using encoder::Encoder;
using encoder::EncoderCache;
using encoder::EncoderSeeds;
using encoder::FeaturePyramid;
using encoder::obs_to_input;
using nn::MatX;
using nn::TensorRef;

namespace {

bool is_stn_param(const std::string& name) { return name.find(".loc_") != std::string::npos; }

void split_refs(std::vector<TensorRef<float>> all, std::vector<TensorRef<float>>& base,
                std::vector<TensorRef<float>>& stn) {
  for (auto& r : all) (is_stn_param(r.name) ? stn : base).push_back(r);
}

void zero_refs(std::vector<TensorRef<float>>& refs) {
  for (auto& r : refs) r.tensor->setZero();
}

}  // namespace

Agent::Agent(AgentConfig cfg, encoder::EncoderConfig enc_cfg, augment::AugmentConfig aug_cfg,
             uint64_t seed)
    : cfg_(std::move(cfg)),
      enc_cfg_(enc_cfg),
      aug_cfg_(std::move(aug_cfg)),
      distractors_(aug_cfg_.distractor_dir) {
  Rng rng(seed);
  encoder_.init(enc_cfg_, rng);
  encoder_grad_.zero_like(encoder_);
  actor_.init(enc_cfg_.feature_dim, cfg_.hidden_dim, cfg_.action_dim, rng);
  actor_grad_.zero_like(actor_);
  critic1_.init(enc_cfg_.feature_dim, cfg_.hidden_dim, cfg_.action_dim, rng);
  critic2_.init(enc_cfg_.feature_dim, cfg_.hidden_dim, cfg_.action_dim, rng);
  critic1_grad_.zero_like(critic1_);
  critic2_grad_.zero_like(critic2_);
  actor_target_ = actor_;
  critic1_target_ = critic1_;
  critic2_target_ = critic2_;
  explore_sigma_ = cfg_.explore_sigma_start;

  std::vector<TensorRef<float>> enc_p, enc_g;
  encoder_.collect("enc", enc_p);
  encoder_grad_.collect("enc", enc_g);
  std::vector<TensorRef<float>> base_p, stn_p, base_g, stn_g;
  split_refs(enc_p, base_p, stn_p);
  split_refs(enc_g, base_g, stn_g);
  opt_encoder_.attach(base_p, base_g, cfg_.encoder_lr);
  opt_stn_.attach(stn_p, stn_g, cfg_.stn_lr);

  std::vector<TensorRef<float>> actor_p, actor_g;
  actor_.collect("actor", actor_p);
  actor_grad_.collect("actor", actor_g);
  opt_actor_.attach(actor_p, actor_g, cfg_.actor_lr);

  std::vector<TensorRef<float>> critic_p, critic_g;
  critic1_.collect("critic1", critic_p);
  critic2_.collect("critic2", critic_p);
  critic1_grad_.collect("critic1", critic_g);
  critic2_grad_.collect("critic2", critic_g);
  opt_critic_.attach(critic_p, critic_g, cfg_.critic_lr);
}

double Agent::explore_sigma_for_step(int64_t step) const {
  if (cfg_.explore_decay_steps <= 0) return cfg_.explore_sigma_end;
  const double t = std::clamp(double(step) / double(cfg_.explore_decay_steps), 0.0, 1.0);
  return cfg_.explore_sigma_start + t * (cfg_.explore_sigma_end - cfg_.explore_sigma_start);
}

Eigen::VectorXf Agent::act(const sim::FrameStack& obs, bool explore, Rng& rng) {
  EncoderCache<float> cache;
  const FeaturePyramid<float> pyr = encoder_.forward(obs_to_input<float>(obs), cache);
  typename Actor<float>::Cache ac;
  MatX<float> emb(pyr.embedding.size(), 1);
  emb.col(0) = pyr.embedding;
  MatX<float> a = actor_.forward(emb, ac);
  Eigen::VectorXf out = a.col(0);
  if (explore) {
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const double n = std::clamp(rng.normal(0.0, explore_sigma_), -cfg_.noise_clip, cfg_.noise_clip);
      out[i] = float(std::clamp(double(out[i]) + n, -1.0, 1.0));
    }
  }
  return out;
}

Eigen::VectorXd Agent::smooth_action(const Eigen::VectorXd& raw, const Eigen::VectorXd& prev,
                                     double beta) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("smooth_action: beta outside [0,1]");
  return beta * prev + (1.0 - beta) * raw;
}

encoder::FeaturePyramid<float> Agent::encode(const sim::FrameStack& obs) const {
  EncoderCache<float> cache;
  return encoder_.forward(obs_to_input<float>(obs), cache);
}

Eigen::VectorXf Agent::critic_penultimate(const Eigen::VectorXf& emb,
                                          const Eigen::VectorXf& action) const {
  typename Critic<float>::Cache c;
  MatX<float> e(emb.size(), 1), a(action.size(), 1);
  e.col(0) = emb;
  a.col(0) = action;
  critic1_.forward(e, a, c);
  return critic1_.penultimate(c).col(0);
}

float Agent::q_value(const Eigen::VectorXf& emb, const Eigen::VectorXf& action) const {
  typename Critic<float>::Cache c;
  MatX<float> e(emb.size(), 1), a(action.size(), 1);
  e.col(0) = emb;
  a.col(0) = action;
  return critic1_.forward(e, a, c)(0, 0);
}

Eigen::VectorXf Agent::policy_action(const Eigen::VectorXf& emb) const {
  typename Actor<float>::Cache c;
  MatX<float> e(emb.size(), 1);
  e.col(0) = emb;
  return actor_.forward(e, c).col(0);
}

nn::FeatureMap<float> Agent::value_gradient_stage2(const sim::FrameStack& obs) const {
  EncoderCache<float> cache;
  const FeaturePyramid<float> pyr = encoder_.forward(obs_to_input<float>(obs), cache);
  MatX<float> emb(pyr.embedding.size(), 1);
  emb.col(0) = pyr.embedding;

  typename Actor<float>::Cache ac;
  MatX<float> a = actor_.forward(emb, ac);
  typename Critic<float>::Cache cc;
  critic1_.forward(emb, a, cc);

  Critic<float> critic_scratch;
  critic_scratch.zero_like(critic1_);
  MatX<float> dq = MatX<float>::Ones(1, 1);
  MatX<float> dxa = critic1_.backward(cc, dq, critic_scratch);

  EncoderSeeds<float> seeds;
  seeds.d_embedding = dxa.topRows(enc_cfg_.feature_dim).col(0);
  Encoder<float> enc_scratch;
  enc_scratch.zero_like(encoder_);
  nn::FeatureMap<float> probe;
  encoder_.backward(cache, seeds, enc_scratch, &probe);
  return probe;
}

LossBundleF Agent::update(const SampledBatch& batch, const curriculum::CurriculumState& cur,
                          Rng& rng) {
  static const bool profile = std::getenv("MVRL_PROFILE") != nullptr;
  auto tick = std::chrono::steady_clock::now();
  auto lap = [&](const char* what) {
    if (!profile) return;
    const auto now = std::chrono::steady_clock::now();
    std::cerr << "  [update] " << what << " "
              << std::chrono::duration<double, std::milli>(now - tick).count() << " ms\n";
    tick = now;
  };
  const int B = int(batch.size());
  if (B < 1) throw std::invalid_argument("update: empty batch");
  const int D = enc_cfg_.feature_dim;
  const bool mv = cfg_.multiview_enabled;
  const bool use_move = cur.aug_view() == curriculum::AugView::kMoving;
  const double strength = aug_cfg_.enabled ? cur.magnitude : 0.0;
  const auto& sel_t = use_move ? batch.moving_t : batch.fixed_t;
  const auto& sel_tn = use_move ? batch.moving_tn : batch.fixed_tn;

  // identity augmentation on the fixed view collapses to the clean encode
  const bool share_fixed_aug = mv && !use_move && strength == 0.0;

  std::vector<uint64_t> aug_seeds(B), con_seeds(2 * B);
  for (auto& s : aug_seeds) s = rng.next_u64();
  for (auto& s : con_seeds) s = rng.next_u64();

  std::vector<EncoderCache<float>> cache_aug(share_fixed_aug ? 0 : B);
  std::vector<EncoderCache<float>> cache_fixed(mv ? B : 0), cache_move(mv ? B : 0);
  std::vector<FeaturePyramid<float>> pyr_fixed(mv ? B : 0), pyr_move(mv ? B : 0);
  MatX<float> emb_aug(D, B), emb_next(D, B);
  MatX<float> emb_fixed(D, mv ? B : 0), emb_move(D, mv ? B : 0);

  const int threads = std::max(1, cfg_.threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (int b = 0; b < B; ++b) {
    if (!share_fixed_aug) {
      sim::FrameStack aug_stack =
          strength > 0.0 ? augment::augment(sel_t[b], strength, aug_seeds[b], aug_cfg_, distractors_)
                         : sel_t[b];
      const auto pyr = encoder_.forward(obs_to_input<float>(aug_stack), cache_aug[b]);
      emb_aug.col(b) = pyr.embedding;
    }
    if (mv) {
      sim::FrameStack fixed_stack = batch.fixed_t[b];
      sim::FrameStack move_stack = batch.moving_t[b];
      if (cfg_.augment_contrastive && strength > 0.0) {
        fixed_stack = augment::augment(fixed_stack, strength, con_seeds[2 * b], aug_cfg_, distractors_);
        move_stack = augment::augment(move_stack, strength, con_seeds[2 * b + 1], aug_cfg_, distractors_);
      }
      pyr_fixed[b] = encoder_.forward(obs_to_input<float>(fixed_stack), cache_fixed[b]);
      emb_fixed.col(b) = pyr_fixed[b].embedding;
      if (share_fixed_aug) emb_aug.col(b) = pyr_fixed[b].embedding;
      pyr_move[b] = encoder_.forward(obs_to_input<float>(move_stack), cache_move[b]);
      emb_move.col(b) = pyr_move[b].embedding;
    }
    EncoderCache<float> scratch;
    emb_next.col(b) = encoder_.forward(obs_to_input<float>(sel_tn[b]), scratch).embedding;
  }

  lap("encode");
  // frozen n-step targets from the online encoder and target heads
  typename Actor<float>::Cache tac;
  MatX<float> a_next = actor_target_.forward(emb_next, tac);
  typename Critic<float>::Cache tc1, tc2;
  MatX<float> q1n = critic1_target_.forward(emb_next, a_next, tc1);
  MatX<float> q2n = critic2_target_.forward(emb_next, a_next, tc2);
  MatX<float> target(1, B);
  for (int b = 0; b < B; ++b) {
    const double bootstrap = std::min(double(q1n(0, b)), double(q2n(0, b)));
    target(0, b) = float(objectives::n_step_target(batch.reward_windows[b],
                                                   batch.discount_windows[b], bootstrap));
  }

  lap("targets");
  // critic regression on the augmented branch
  MatX<float> actions(cfg_.action_dim, B);
  for (int b = 0; b < B; ++b) actions.col(b) = batch.actions[b];

  std::vector<TensorRef<float>> critic_grad_refs;
  critic1_grad_.collect("c1", critic_grad_refs);
  critic2_grad_.collect("c2", critic_grad_refs);
  zero_refs(critic_grad_refs);

  typename Critic<float>::Cache cc1, cc2;
  MatX<float> q1 = critic1_.forward(emb_aug, actions, cc1);
  MatX<float> q2 = critic2_.forward(emb_aug, actions, cc2);
  MatX<float> dq1, dq2;
  LossBundleF bundle;
  bundle.q_loss = objectives::q_regression_loss(q1, target, &dq1) +
                  objectives::q_regression_loss(q2, target, &dq2);
  MatX<float> dxa1 = critic1_.backward(cc1, dq1, critic1_grad_);
  MatX<float> dxa2 = critic2_.backward(cc2, dq2, critic2_grad_);
  MatX<float> d_emb_aug = dxa1.topRows(D) + dxa2.topRows(D);

  lap("critic");
  // representation objective on the clean pair
  MatX<float> d_emb_fixed, d_emb_move;
  std::vector<EncoderSeeds<float>> seeds_fixed(mv ? B : 0), seeds_move(mv ? B : 0);
  if (mv) {
    d_emb_fixed.resize(D, B);
    d_emb_move.resize(D, B);
    bundle.j_con = objectives::info_nce_symmetric<float>(
        emb_fixed, emb_move, float(cfg_.temperature), cfg_.normalize_embeddings, &d_emb_fixed,
        &d_emb_move, &bundle.diagnostics);
    bundle.j_feat = objectives::feature_align<float>(
        pyr_fixed, pyr_move, cfg_.align_layers, &bundle.diagnostics, &seeds_fixed, &seeds_move,
        float(cfg_.lambda), cfg_.align_grads_into_fixed);
    objectives::combine_representation_loss(bundle, float(cfg_.lambda));
    for (int b = 0; b < B; ++b) {
      seeds_fixed[b].d_embedding = d_emb_fixed.col(b);
      seeds_move[b].d_embedding = d_emb_move.col(b);
    }
  }

  lap("rep_losses");
  if (!std::isfinite(double(bundle.q_loss)) || !std::isfinite(double(bundle.j_con)) ||
      !std::isfinite(double(bundle.j_feat))) {
    std::ostringstream os;
    os << "non-finite loss: q=" << bundle.q_loss << " j_con=" << bundle.j_con
       << " j_feat=" << bundle.j_feat << " update=" << updates_ << " magnitude=" << cur.magnitude;
    throw std::runtime_error(os.str());
  }

  // encoder backward: critic branch plus both representation branches
  std::vector<EncoderSeeds<float>> seeds_aug(share_fixed_aug ? 0 : size_t(B));
  if (!share_fixed_aug)
    for (int b = 0; b < B; ++b) seeds_aug[b].d_embedding = d_emb_aug.col(b);
  else
    for (int b = 0; b < B; ++b) seeds_fixed[b].d_embedding += d_emb_aug.col(b);

  std::vector<TensorRef<float>> enc_grad_refs;
  encoder_grad_.collect("enc", enc_grad_refs);
  zero_refs(enc_grad_refs);

  std::vector<std::unique_ptr<Encoder<float>>> extra_grads;
  for (int t = 1; t < threads; ++t) {
    extra_grads.push_back(std::make_unique<Encoder<float>>());
    extra_grads.back()->zero_like(encoder_);
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads)
#endif
  for (int b = 0; b < B; ++b) {
#ifdef _OPENMP
    const int tid = omp_get_thread_num();
#else
    const int tid = 0;
#endif
    Encoder<float>& g = tid == 0 ? encoder_grad_ : *extra_grads[size_t(tid) - 1];
    if (!share_fixed_aug) encoder_.backward(cache_aug[b], seeds_aug[b], g);
    if (mv) {
      encoder_.backward(cache_fixed[b], seeds_fixed[b], g);
      encoder_.backward(cache_move[b], seeds_move[b], g);
    }
  }
  for (auto& extra : extra_grads) {
    std::vector<TensorRef<float>> refs;
    extra->collect("enc", refs);
    for (size_t i = 0; i < refs.size(); ++i) *enc_grad_refs[i].tensor += *refs[i].tensor;
  }

  lap("backward");
  opt_encoder_.step();
  opt_stn_.step();
  opt_critic_.step();

  lap("adam");
  // actor step on detached embeddings; critic grads here are discarded
  zero_refs(critic_grad_refs);
  std::vector<TensorRef<float>> actor_grad_refs;
  actor_grad_.collect("actor", actor_grad_refs);
  zero_refs(actor_grad_refs);

  typename Actor<float>::Cache ac;
  MatX<float> a_pi = actor_.forward(emb_aug, ac);
  typename Critic<float>::Cache pc1, pc2;
  MatX<float> q1pi = critic1_.forward(emb_aug, a_pi, pc1);
  MatX<float> q2pi = critic2_.forward(emb_aug, a_pi, pc2);
  bundle.actor_loss = 0.f;
  MatX<float> dq1pi = MatX<float>::Zero(1, B), dq2pi = MatX<float>::Zero(1, B);
  for (int b = 0; b < B; ++b) {
    const bool first = q1pi(0, b) <= q2pi(0, b);
    bundle.actor_loss -= float(std::min(q1pi(0, b), q2pi(0, b))) / float(B);
    (first ? dq1pi : dq2pi)(0, b) = -1.f / float(B);
  }
  MatX<float> d_action = critic1_.backward(pc1, dq1pi, critic1_grad_).bottomRows(cfg_.action_dim) +
                         critic2_.backward(pc2, dq2pi, critic2_grad_).bottomRows(cfg_.action_dim);
  actor_.backward(ac, d_action, actor_grad_);
  opt_actor_.step();

  lap("actor");
  ema_update();
  lap("ema");
  updates_ += 1;

  bundle.diagnostics["target_mean"] = double(target.mean());
  bundle.diagnostics["q_mean"] = double(q1.mean());
  return bundle;
}

void Agent::ema_update() {
  const float eta = float(cfg_.ema_rate);
  auto blend = [eta](std::vector<TensorRef<float>> tgt, std::vector<TensorRef<float>> src) {
    for (size_t i = 0; i < tgt.size(); ++i)
      *tgt[i].tensor = (1.f - eta) * (*tgt[i].tensor) + eta * (*src[i].tensor);
  };
  std::vector<TensorRef<float>> t, s;
  critic1_target_.collect("t", t);
  critic1_.collect("s", s);
  blend(t, s);
  t.clear();
  s.clear();
  critic2_target_.collect("t", t);
  critic2_.collect("s", s);
  blend(t, s);
  t.clear();
  s.clear();
  actor_target_.collect("t", t);
  actor_.collect("s", s);
  blend(t, s);
}

std::vector<TensorRef<float>> Agent::target_params() {
  std::vector<TensorRef<float>> refs;
  critic1_target_.collect("critic1_t", refs);
  critic2_target_.collect("critic2_t", refs);
  actor_target_.collect("actor_t", refs);
  return refs;
}

std::vector<TensorRef<float>> Agent::online_params() {
  std::vector<TensorRef<float>> refs;
  critic1_.collect("critic1", refs);
  critic2_.collect("critic2", refs);
  actor_.collect("actor", refs);
  return refs;
}

namespace {

void save_adam(BinWriter& w, nn::Adam<float>& opt) {
  w.i64(opt.t());
  w.u32(uint32_t(opt.size()));
  for (size_t i = 0; i < opt.size(); ++i) {
    w.tensor("m", opt.moment1(i));
    w.tensor("v", opt.moment2(i));
  }
}

void load_adam(BinReader& r, nn::Adam<float>& opt) {
  opt.set_t(r.i64());
  const uint32_t n = r.u32();
  if (n != opt.size()) throw std::runtime_error("checkpoint optimizer shape mismatch");
  for (size_t i = 0; i < opt.size(); ++i) {
    r.tensor("m", opt.moment1(i));
    r.tensor("v", opt.moment2(i));
  }
}

}  // namespace

void Agent::save(BinWriter& w) const {
  auto& self = const_cast<Agent&>(*this);
  std::vector<TensorRef<float>> refs;
  self.encoder_.collect("enc", refs);
  self.actor_.collect("actor", refs);
  self.critic1_.collect("critic1", refs);
  self.critic2_.collect("critic2", refs);
  self.actor_target_.collect("actor_t", refs);
  self.critic1_target_.collect("critic1_t", refs);
  self.critic2_target_.collect("critic2_t", refs);
  w.u32(uint32_t(refs.size()));
  for (auto& ref : refs) w.tensor(ref.name, *ref.tensor);
  save_adam(w, self.opt_encoder_);
  save_adam(w, self.opt_stn_);
  save_adam(w, self.opt_actor_);
  save_adam(w, self.opt_critic_);
  w.f64(explore_sigma_);
  w.i64(updates_);
}

void Agent::load(BinReader& r) {
  std::vector<TensorRef<float>> refs;
  encoder_.collect("enc", refs);
  actor_.collect("actor", refs);
  critic1_.collect("critic1", refs);
  critic2_.collect("critic2", refs);
  actor_target_.collect("actor_t", refs);
  critic1_target_.collect("critic1_t", refs);
  critic2_target_.collect("critic2_t", refs);
  const uint32_t n = r.u32();
  if (n != refs.size()) throw std::runtime_error("checkpoint parameter count mismatch");
  for (auto& ref : refs) r.tensor(ref.name, *ref.tensor);
  load_adam(r, opt_encoder_);
  load_adam(r, opt_stn_);
  load_adam(r, opt_actor_);
  load_adam(r, opt_critic_);
  explore_sigma_ = r.f64();
  updates_ = r.i64();
}

}  // namespace mvrl::agent
