#pragma once

#include <cmath>

#include "mvrl/encoder/homography.hpp"
#include "mvrl/nn/tensor.hpp"

namespace mvrl::encoder {

using nn::FeatureMap;
using nn::MatX;

// Per-pixel sampling state kept for the backward pass.
template <class S>
struct WarpCache {
  std::vector<S> u, v;      // source pixel coordinates per output pixel
  std::vector<S> xt, yt;    // target grid coordinates (normalized)
  std::vector<S> inv_den;   // 1 / (h20*xt + h21*yt + h22)
  std::vector<S> xs, ys;    // normalized source coordinates
  S min_cell_margin = S(1); // distance of (u,v) to the nearest integer lattice
};

// Perspective grid sampling: for each target pixel, source = H * target in
// normalized [-1,1] coordinates (corner-aligned), bilinear with zero padding.
template <class S>
FeatureMap<S> warp_forward(const FeatureMap<S>& x, const Eigen::Matrix<S, 3, 3>& h,
                           WarpCache<S>* cache = nullptr) {
  const S det = h.determinant();
  if (std::abs(double(det)) < 1e-9) throw std::invalid_argument("warp: homography not invertible");

  const int H = x.height, W = x.width;
  FeatureMap<S> y(x.channels, H, W);
  const S sx = W > 1 ? S(2.0 / (W - 1)) : S(0);
  const S sy = H > 1 ? S(2.0 / (H - 1)) : S(0);

  if (cache) {
    const size_t n = size_t(H) * W;
    cache->u.resize(n);
    cache->v.resize(n);
    cache->xt.resize(n);
    cache->yt.resize(n);
    cache->inv_den.resize(n);
    cache->xs.resize(n);
    cache->ys.resize(n);
    cache->min_cell_margin = S(1);
  }

  for (int i = 0; i < H; ++i) {
    const S yt = S(-1) + S(i) * sy;
    for (int j = 0; j < W; ++j) {
      const S xt = S(-1) + S(j) * sx;
      const S den = h(2, 0) * xt + h(2, 1) * yt + h(2, 2);
      const S inv_den = S(1) / den;
      const S xs = (h(0, 0) * xt + h(0, 1) * yt + h(0, 2)) * inv_den;
      const S ys = (h(1, 0) * xt + h(1, 1) * yt + h(1, 2)) * inv_den;
      const S u = (xs + S(1)) * S(0.5) * S(W - 1);
      const S v = (ys + S(1)) * S(0.5) * S(H - 1);

      const int pix = i * W + j;
      if (cache) {
        cache->u[pix] = u;
        cache->v[pix] = v;
        cache->xt[pix] = xt;
        cache->yt[pix] = yt;
        cache->inv_den[pix] = inv_den;
        cache->xs[pix] = xs;
        cache->ys[pix] = ys;
        const S mu = std::abs(u - std::round(double(u)));
        const S mv = std::abs(v - std::round(double(v)));
        cache->min_cell_margin = std::min({cache->min_cell_margin, mu, mv});
      }

      const int u0 = int(std::floor(double(u)));
      const int v0 = int(std::floor(double(v)));
      const S a = u - S(u0);
      const S b = v - S(v0);

      auto col = [&](int uu, int vv) -> const S* {
        if (uu < 0 || uu >= W || vv < 0 || vv >= H) return nullptr;
        return x.data.col(vv * W + uu).data();
      };
      const S* c00 = col(u0, v0);
      const S* c10 = col(u0 + 1, v0);
      const S* c01 = col(u0, v0 + 1);
      const S* c11 = col(u0 + 1, v0 + 1);
      const S w00 = (S(1) - a) * (S(1) - b), w10 = a * (S(1) - b);
      const S w01 = (S(1) - a) * b, w11 = a * b;

      S* out = y.data.col(pix).data();
      for (int c = 0; c < x.channels; ++c) {
        S acc = S(0);
        if (c00) acc += w00 * c00[c];
        if (c10) acc += w10 * c10[c];
        if (c01) acc += w01 * c01[c];
        if (c11) acc += w11 * c11[c];
        out[c] = acc;
      }
    }
  }
  return y;
}

// Backward through the sampler: accumulates dL/dx and dL/dH. The (2,2) entry
// of dh is reported too; callers with a fixed scale entry drop it.
template <class S>
void warp_backward(const FeatureMap<S>& x, const Eigen::Matrix<S, 3, 3>& /*h*/,
                   const WarpCache<S>& cache, const FeatureMap<S>& dy, FeatureMap<S>& dx,
                   Eigen::Matrix<S, 3, 3>& dh) {
  const int H = x.height, W = x.width;
  if (dx.channels == 0) dx = FeatureMap<S>(x.channels, H, W);

  for (int pix = 0; pix < H * W; ++pix) {
    const S u = cache.u[pix], v = cache.v[pix];
    const int u0 = int(std::floor(double(u)));
    const int v0 = int(std::floor(double(v)));
    const S a = u - S(u0);
    const S b = v - S(v0);

    auto valid = [&](int uu, int vv) { return uu >= 0 && uu < W && vv >= 0 && vv < H; };
    const bool ok00 = valid(u0, v0), ok10 = valid(u0 + 1, v0);
    const bool ok01 = valid(u0, v0 + 1), ok11 = valid(u0 + 1, v0 + 1);

    const auto g = dy.data.col(pix);
    // scatter into dx
    if (ok00) dx.data.col(v0 * W + u0) += (S(1) - a) * (S(1) - b) * g;
    if (ok10) dx.data.col(v0 * W + u0 + 1) += a * (S(1) - b) * g;
    if (ok01) dx.data.col((v0 + 1) * W + u0) += (S(1) - a) * b * g;
    if (ok11) dx.data.col((v0 + 1) * W + u0 + 1) += a * b * g;

    // spatial derivative of the sampled value wrt (u,v)
    S dval_du = S(0), dval_dv = S(0);
    for (int c = 0; c < x.channels; ++c) {
      const S x00 = ok00 ? x.data(c, v0 * W + u0) : S(0);
      const S x10 = ok10 ? x.data(c, v0 * W + u0 + 1) : S(0);
      const S x01 = ok01 ? x.data(c, (v0 + 1) * W + u0) : S(0);
      const S x11 = ok11 ? x.data(c, (v0 + 1) * W + u0 + 1) : S(0);
      const S gc = g[c];
      dval_du += gc * ((S(1) - b) * (x10 - x00) + b * (x11 - x01));
      dval_dv += gc * ((S(1) - a) * (x01 - x00) + a * (x11 - x10));
    }

    const S du_dxs = S(0.5) * S(W - 1);
    const S dv_dys = S(0.5) * S(H - 1);
    const S dxs = dval_du * du_dxs;
    const S dys = dval_dv * dv_dys;

    const S xt = cache.xt[pix], yt = cache.yt[pix];
    const S inv_den = cache.inv_den[pix];
    const S xs = cache.xs[pix], ys = cache.ys[pix];

    dh(0, 0) += dxs * xt * inv_den;
    dh(0, 1) += dxs * yt * inv_den;
    dh(0, 2) += dxs * inv_den;
    dh(1, 0) += dys * xt * inv_den;
    dh(1, 1) += dys * yt * inv_den;
    dh(1, 2) += dys * inv_den;
    dh(2, 0) += -(dxs * xs + dys * ys) * xt * inv_den;
    dh(2, 1) += -(dxs * xs + dys * ys) * yt * inv_den;
    dh(2, 2) += -(dxs * xs + dys * ys) * inv_den;
  }
}

// Convenience overload working with the double-precision Homography type.
template <class S>
FeatureMap<S> warp(const FeatureMap<S>& x, const Homography& h) {
  Eigen::Matrix<S, 3, 3> hm = h.m.cast<S>();
  return warp_forward<S>(x, hm, nullptr);
}

}  // namespace mvrl::encoder
