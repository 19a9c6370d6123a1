#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mvrl/encoder/encoder.hpp"

namespace mvrl::objectives {

using encoder::EncoderSeeds;
using encoder::FeaturePyramid;
using nn::MatX;
using nn::VecX;

template <class S>
struct LossBundle {
  S j_con = S(0);
  S j_feat = S(0);
  S total_rep = S(0);
  S q_loss = S(0);
  S actor_loss = S(0);
  std::map<std::string, double> diagnostics;
};

// L2-normalize columns; returns norms for the backward pass.
template <class S>
MatX<S> l2_normalize_columns(const MatX<S>& x, VecX<S>& norms) {
  norms = x.colwise().norm();
  if ((norms.array() <= S(0)).any())
    throw std::invalid_argument("info_nce: zero-norm embedding");
  return x.array().rowwise() / norms.transpose().array();
}

// Symmetrized InfoNCE over paired batches (columns are samples). The positive
// for anchor i is column i of the other batch; the other columns are the
// negatives. Optionally emits dL/d(fixed), dL/d(move) and similarity stats.
template <class S>
S info_nce_symmetric(const MatX<S>& fixed, const MatX<S>& move, S tau, bool normalize = true,
                     MatX<S>* d_fixed = nullptr, MatX<S>* d_move = nullptr,
                     std::map<std::string, double>* diagnostics = nullptr) {
  const Eigen::Index B = fixed.cols();
  if (B < 2) throw std::invalid_argument("info_nce: batch of at least 2 required");
  if (move.cols() != B || move.rows() != fixed.rows())
    throw std::invalid_argument("info_nce: batch shape mismatch");
  if (tau <= S(0)) throw std::invalid_argument("info_nce: temperature must be positive");

  VecX<S> fn, mn;
  MatX<S> f = normalize ? l2_normalize_columns(fixed, fn) : fixed;
  MatX<S> m = normalize ? l2_normalize_columns(move, mn) : move;

  MatX<S> logits = (f.transpose() * m) / tau;  // (i,j) = sim(fixed_i, move_j)

  // row direction: anchor fixed_i against move_j
  MatX<S> p_row(B, B), p_col(B, B);
  S loss = S(0);
  for (Eigen::Index i = 0; i < B; ++i) {
    const S mx = logits.row(i).maxCoeff();
    VecX<S> e = (logits.row(i).array() - mx).exp();
    const S z = e.sum();
    p_row.row(i) = (e / z).transpose();
    loss += -(logits(i, i) - mx - std::log(z));
  }
  for (Eigen::Index j = 0; j < B; ++j) {
    const S mx = logits.col(j).maxCoeff();
    VecX<S> e = (logits.col(j).array() - mx).exp();
    const S z = e.sum();
    p_col.col(j) = e / z;
    loss += -(logits(j, j) - mx - std::log(z));
  }
  loss /= S(2 * B);

  if (diagnostics) {
    double pos = 0, neg = 0;
    for (Eigen::Index i = 0; i < B; ++i) pos += double(logits(i, i)) * double(tau);
    for (Eigen::Index i = 0; i < B; ++i)
      for (Eigen::Index j = 0; j < B; ++j)
        if (i != j) neg += double(logits(i, j)) * double(tau);
    (*diagnostics)["infonce_positive_sim"] = pos / double(B);
    (*diagnostics)["infonce_negative_sim"] = B > 1 ? neg / double(B * (B - 1)) : 0.0;
  }

  if (d_fixed || d_move) {
    MatX<S> g = (p_row + p_col) / S(2 * B);
    for (Eigen::Index i = 0; i < B; ++i) g(i, i) -= S(1) / S(B);
    MatX<S> df_hat = (m * g.transpose()) / tau;
    MatX<S> dm_hat = (f * g) / tau;
    if (normalize) {
      // through x/|x|: d = (dhat - xhat * (xhat . dhat)) / |x|
      for (Eigen::Index c = 0; c < B; ++c) {
        const S fdot = f.col(c).dot(df_hat.col(c));
        const S mdot = m.col(c).dot(dm_hat.col(c));
        if (d_fixed) d_fixed->col(c) = (df_hat.col(c) - f.col(c) * fdot) / fn[c];
        if (d_move) d_move->col(c) = (dm_hat.col(c) - m.col(c) * mdot) / mn[c];
      }
    } else {
      if (d_fixed) *d_fixed = df_hat;
      if (d_move) *d_move = dm_hat;
    }
  }
  return loss;
}

// Sum over selected layers of squared L2 distance between paired flattened
// feature maps, averaged over the batch. grad_weight scales the gradients
// accumulated into the seed structures (lambda for the combined objective).
template <class S>
S feature_align(const std::vector<FeaturePyramid<S>>& fixed,
                const std::vector<FeaturePyramid<S>>& move,
                const std::vector<std::string>& layers,
                std::map<std::string, double>* per_layer = nullptr,
                std::vector<EncoderSeeds<S>>* d_fixed = nullptr,
                std::vector<EncoderSeeds<S>>* d_move = nullptr, S grad_weight = S(1),
                bool grads_into_fixed = true) {
  const size_t B = fixed.size();
  if (move.size() != B || B == 0) throw std::invalid_argument("feature_align: batch mismatch");

  S total = S(0);
  for (const auto& tag : layers) {
    S layer_sum = S(0);
    for (size_t b = 0; b < B; ++b) {
      const auto& mf = fixed[b].map(tag);
      const auto& mm = move[b].map(tag);
      if (!mf.same_shape(mm)) throw std::invalid_argument("feature_align: shape mismatch at " + tag);
      nn::FeatureMap<S> diff = mf;
      diff.data -= mm.data;
      layer_sum += diff.data.squaredNorm();
      if (d_fixed || d_move) {
        nn::FeatureMap<S> g = diff;
        g.data *= S(2) * grad_weight / S(B);
        if (d_move) {
          auto& slot = (*d_move)[b].d_maps[tag];
          if (slot.channels == 0) slot = nn::FeatureMap<S>(mm.channels, mm.height, mm.width);
          slot.data -= g.data;
        }
        if (d_fixed && grads_into_fixed) {
          auto& slot = (*d_fixed)[b].d_maps[tag];
          if (slot.channels == 0) slot = nn::FeatureMap<S>(mf.channels, mf.height, mf.width);
          slot.data += g.data;
        }
      }
    }
    layer_sum /= S(B);
    total += layer_sum;
    if (per_layer) (*per_layer)["align_" + tag] = double(layer_sum);
  }
  return total;
}

// Combined representation objective: total = j_con + lambda * j_feat.
template <class S>
void combine_representation_loss(LossBundle<S>& bundle, S lambda) {
  if (lambda < S(0)) throw std::invalid_argument("lambda must be non-negative");
  bundle.total_rep = bundle.j_con + lambda * bundle.j_feat;
}

// Discounted n-step return with a bootstrap value. Per-step discounts are
// gamma, or 0 at a terminal transition, which truncates the tail.
inline double n_step_target(std::span<const double> rewards, std::span<const double> discounts,
                            double bootstrap_q) {
  if (rewards.empty()) throw std::invalid_argument("n_step_target: empty reward slice");
  if (discounts.size() != rewards.size())
    throw std::invalid_argument("n_step_target: discount slice mismatch");
  // left-to-right expansion, the same order a per-step recomputation uses
  double g = 0.0, running = 1.0;
  for (size_t k = 0; k < rewards.size(); ++k) {
    g += running * rewards[k];
    running *= discounts[k];
  }
  return g + running * bootstrap_q;
}

inline double n_step_target(std::span<const double> rewards, double gamma, double bootstrap_q) {
  std::vector<double> d(rewards.size(), gamma);
  return n_step_target(rewards, std::span<const double>(d), bootstrap_q);
}

// Mean squared TD error against a frozen target; d_q gets dL/dq.
template <class S>
S q_regression_loss(const MatX<S>& q, const MatX<S>& target, MatX<S>* d_q = nullptr) {
  if (q.rows() != 1 || target.rows() != 1 || q.cols() != target.cols())
    throw std::invalid_argument("q_regression_loss: expects 1 x B rows");
  const Eigen::Index B = q.cols();
  MatX<S> diff = q - target;
  if (d_q) *d_q = diff * S(2) / S(B);
  return diff.array().square().mean();
}

}  // namespace mvrl::objectives
