#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvrl/core/image.hpp"
#include "mvrl/core/rng.hpp"

namespace mvrl::sim {

struct DepthConfig {
  bool noise_enabled = true;
  bool blur_enabled = true;
  double noise_sigma_m = 0.01;       // absolute gaussian noise, meters
  double noise_depth_scale = 0.05;   // plus N(0, scale*|depth|)
  double blur_sigma = 1.0;
  int blur_kernel = 5;               // odd
  double clip_m = 2.0;               // depths clipped to [0, clip] then mapped to [0,255]
};

namespace detail {

inline void gaussian_blur_inplace(PlaneF& p, double sigma, int kernel) {
  const int r = kernel / 2;
  std::vector<float> w(kernel);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    w[i + r] = float(std::exp(-0.5 * (i * i) / (sigma * sigma)));
    sum += w[i + r];
  }
  for (auto& x : w) x = float(x / sum);

  PlaneF tmp(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      float acc = 0.f;
      for (int i = -r; i <= r; ++i) {
        const int xx = std::clamp(x + i, 0, p.width - 1);
        acc += w[i + r] * p.at(xx, y);
      }
      tmp.at(x, y) = acc;
    }
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      float acc = 0.f;
      for (int i = -r; i <= r; ++i) {
        const int yy = std::clamp(y + i, 0, p.height - 1);
        acc += w[i + r] * tmp.at(x, yy);
      }
      p.at(x, y) = acc;
    }
}

}  // namespace detail

// Sensor model applied to raw metric depth: additive and depth-proportional
// gaussian noise, gaussian blur, clip to [0, clip_m], linear map to [0, 255].
inline Image8 preprocess_depth(const PlaneF& raw, Rng& rng, const DepthConfig& cfg) {
  PlaneF work = raw;
  if (cfg.noise_enabled) {
    for (auto& d : work.data) {
      const double noisy = d + rng.normal(0.0, cfg.noise_sigma_m) +
                           rng.normal(0.0, cfg.noise_depth_scale * std::abs(double(d)));
      d = float(noisy);
    }
  }
  if (cfg.blur_enabled && cfg.blur_kernel >= 3) {
    detail::gaussian_blur_inplace(work, cfg.blur_sigma, cfg.blur_kernel | 1);
  }
  Image8 out(raw.width, raw.height, 1);
  const double scale = 255.0 / cfg.clip_m;
  for (size_t i = 0; i < work.data.size(); ++i) {
    const double clipped = std::clamp(double(work.data[i]), 0.0, cfg.clip_m);
    out.data[i] = uint8_t(std::lround(clipped * scale));
  }
  return out;
}

inline Image8 preprocess_depth(const PlaneF& raw, uint64_t seed, const DepthConfig& cfg) {
  Rng rng(seed);
  return preprocess_depth(raw, rng, cfg);
}

}  // namespace mvrl::sim
