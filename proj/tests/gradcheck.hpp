#pragma once

// Finite-difference harness shared by the gradient unit tests and the
// acceptance suite. Checks analytic gradients of a scalar loss against
// central differences on sampled parameter coordinates, at float64.

#include <functional>
#include <string>
#include <vector>

#include "mvrl/agent/nets.hpp"
#include "mvrl/encoder/encoder.hpp"
#include "mvrl/objectives/losses.hpp"

namespace gradcheck {

using mvrl::Rng;
using mvrl::encoder::Encoder;
using mvrl::encoder::EncoderCache;
using mvrl::encoder::EncoderConfig;
using mvrl::nn::FeatureMap;
using mvrl::nn::MatX;
using mvrl::nn::TensorRef;

struct Result {
  double max_rel_err = 0.0;
  std::string worst;
  int checked = 0;
};

// loss_fn must recompute the loss from current parameter values; grads_fn
// must zero + refill the analytic gradients and return the loss.
inline Result check(std::vector<TensorRef<double>> params, std::vector<TensorRef<double>> grads,
                    const std::function<double()>& loss_fn,
                    const std::function<double()>& grads_fn, int samples_per_tensor = 6,
                    double h = 3e-6, uint64_t seed = 1234) {
  grads_fn();
  Result res;
  Rng rng(seed);
  for (size_t p = 0; p < params.size(); ++p) {
    MatX<double>& w = *params[p].tensor;
    const MatX<double>& g = *grads[p].tensor;
    if (w.size() == 0) continue;
    for (int s = 0; s < samples_per_tensor; ++s) {
      const Eigen::Index idx = Eigen::Index(rng.uniform_int(0, w.size() - 1));
      const double saved = w.data()[idx];
      w.data()[idx] = saved + h;
      const double lp = loss_fn();
      w.data()[idx] = saved - h;
      const double lm = loss_fn();
      w.data()[idx] = saved;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = g.data()[idx];
      const double denom = std::max(1e-7, std::abs(fd) + std::abs(an));
      const double rel = std::abs(fd - an) / denom;
      res.checked += 1;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst = params[p].name + "[" + std::to_string(idx) + "] fd=" + std::to_string(fd) +
                    " an=" + std::to_string(an);
      }
    }
  }
  return res;
}

inline EncoderConfig tiny_encoder_config() {
  EncoderConfig cfg;
  cfg.image_size = 16;
  cfg.in_channels = 4;
  cfg.stem_channels = 6;
  cfg.stage1_channels = 8;
  cfg.stage2_channels = 10;
  cfg.feature_dim = 12;
  cfg.loc_channels = 4;
  cfg.loc_hidden = 10;
  cfg.stn_enabled = true;
  return cfg;
}

// Random inputs plus a perturbed localization head so the warp sits away
// from both the identity lattice and relu kinks.
inline void randomize_stn_head(Encoder<double>& enc, uint64_t seed, double scale = 0.03) {
  Rng rng(seed);
  for (Eigen::Index i = 0; i < enc.loc_fc2.w.size(); ++i)
    enc.loc_fc2.w.data()[i] = rng.uniform(-scale, scale);
  for (Eigen::Index i = 0; i < enc.loc_fc2.b.size(); ++i)
    enc.loc_fc2.b.data()[i] = rng.uniform(-scale, scale);
}

inline FeatureMap<double> random_input(const EncoderConfig& cfg, uint64_t seed) {
  FeatureMap<double> x(cfg.in_channels, cfg.image_size, cfg.image_size);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data.data()[i] = rng.uniform(-0.5, 0.5);
  return x;
}

}  // namespace gradcheck
