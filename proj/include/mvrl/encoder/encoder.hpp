#pragma once

#include <map>
#include <string>
#include <vector>

#include "mvrl/encoder/warp.hpp"
#include "mvrl/nn/layers.hpp"
#include "mvrl/sim/env.hpp"

namespace mvrl::encoder {

using nn::Conv2d;
using nn::FeatureMap;
using nn::Linear;
using nn::MapNorm;
using nn::MatX;
using nn::TensorRef;
using nn::VecNorm;
using nn::VecX;

struct EncoderConfig {
  int image_size = 128;
  int in_channels = 12;  // 3 stacked RGB-D frames
  int stem_channels = 16;
  int stage1_channels = 32;
  int stage2_channels = 64;
  int feature_dim = 256;
  int loc_channels = 8;
  int loc_hidden = 64;
  bool stn_enabled = true;
};

// Embedding plus the intermediate maps the alignment loss consumes.
// Map tags: "stn" (post-warp stem activation), "stage1", "stage2".
template <class S>
struct FeaturePyramid {
  std::vector<std::pair<std::string, FeatureMap<S>>> maps;
  VecX<S> embedding;
  Eigen::Matrix<S, 3, 3> homography = Eigen::Matrix<S, 3, 3>::Identity();

  const FeatureMap<S>& map(const std::string& tag) const {
    for (const auto& [t, m] : maps)
      if (t == tag) return m;
    throw std::invalid_argument("pyramid: unknown layer tag " + tag);
  }
};

// Residual block: conv/2 -> norm -> relu -> conv -> norm, plus a strided
// 1x1 projection shortcut, relu after the sum.
template <class S>
struct Stage {
  Conv2d<S> conv1, conv2, proj;
  MapNorm<S> norm1, norm2;

  struct Cache {
    MatX<S> cols1, cols2, colsp;
    FeatureMap<S> pre1;
    typename MapNorm<S>::Cache n1;
    FeatureMap<S> act1;
    FeatureMap<S> pre2;
    typename MapNorm<S>::Cache n2;
    FeatureMap<S> out;
    S relu_margin = S(1);
  };

  void init(int in_ch, int out_ch, Rng& rng) {
    conv1.init(in_ch, out_ch, 3, 2, 1, rng);
    conv2.init(out_ch, out_ch, 3, 1, 1, rng);
    proj.init(in_ch, out_ch, 1, 2, 0, rng);
    norm1.init(out_ch);
    norm2.init(out_ch);
  }

  void zero_like(const Stage& o) {
    conv1.zero_like(o.conv1);
    conv2.zero_like(o.conv2);
    proj.zero_like(o.proj);
    norm1.zero_like(o.norm1);
    norm2.zero_like(o.norm2);
  }

  FeatureMap<S> forward(const FeatureMap<S>& x, Cache& c) const {
    c.pre1 = conv1.forward(x, c.cols1);
    FeatureMap<S> n1 = norm1.forward(c.pre1, c.n1);
    c.relu_margin = std::min(c.relu_margin, nn::min_abs(n1.data));
    c.act1 = n1;
    nn::relu_inplace(c.act1.data);
    c.pre2 = conv2.forward(c.act1, c.cols2);
    FeatureMap<S> n2 = norm2.forward(c.pre2, c.n2);
    FeatureMap<S> shortcut = proj.forward(x, c.colsp);
    c.out = n2;
    c.out.data += shortcut.data;
    c.relu_margin = std::min(c.relu_margin, nn::min_abs(c.out.data));
    nn::relu_inplace(c.out.data);
    return c.out;
  }

  FeatureMap<S> backward(const FeatureMap<S>& x, const Cache& c, const FeatureMap<S>& dy,
                         Stage& grad) const {
    FeatureMap<S> dsum = c.out;
    dsum.data = nn::relu_backward(c.out.data, dy.data);
    FeatureMap<S> dx = proj.backward(x, c.colsp, dsum, grad.proj);
    FeatureMap<S> dpre2 = norm2.backward(c.pre2, c.n2, dsum, grad.norm2);
    FeatureMap<S> dact1 = conv2.backward(c.act1, c.cols2, dpre2, grad.conv2);
    dact1.data = nn::relu_backward(c.act1.data, dact1.data);
    FeatureMap<S> dpre1 = norm1.backward(c.pre1, c.n1, dact1, grad.norm1);
    dx.data += conv1.backward(x, c.cols1, dpre1, grad.conv1).data;
    return dx;
  }

  void collect(const std::string& p, std::vector<TensorRef<S>>& out) {
    conv1.collect(p + ".conv1", out);
    conv2.collect(p + ".conv2", out);
    proj.collect(p + ".proj", out);
    norm1.collect(p + ".norm1", out);
    norm2.collect(p + ".norm2", out);
  }
};

template <class S>
struct EncoderCache {
  FeatureMap<S> x;
  MatX<S> stem_cols;
  FeatureMap<S> stem_pre;   // conv output, before relu
  FeatureMap<S> stem_act;   // relu output; both the warp input and loc input
  // localization head
  MatX<S> loc_cols;
  FeatureMap<S> loc_pre, loc_act, loc_pooled;
  VecX<S> loc_flat, loc_hidden_post;
  VecX<S> theta;
  Eigen::Matrix<S, 3, 3> hmat;
  WarpCache<S> warp;
  FeatureMap<S> stn_out;
  typename Stage<S>::Cache s1, s2;
  FeatureMap<S> m1, m2;
  VecX<S> flat, head_pre;
  typename VecNorm<S>::Cache head_norm;
  VecX<S> embedding;  // post tanh
  S relu_margin = S(1);
};

template <class S>
struct EncoderSeeds {
  VecX<S> d_embedding;                          // empty -> no seed
  std::map<std::string, FeatureMap<S>> d_maps;  // by pyramid tag
};

template <class S>
struct Encoder {
  EncoderConfig cfg;
  Conv2d<S> stem;
  Conv2d<S> loc_conv;
  Linear<S> loc_fc1, loc_fc2;
  Stage<S> stage1, stage2;
  Linear<S> head;
  VecNorm<S> head_ln;
  int stem_hw = 0, s1_hw = 0, s2_hw = 0;

  void init(const EncoderConfig& config, Rng& rng) {
    cfg = config;
    stem.init(cfg.in_channels, cfg.stem_channels, 3, 2, 1, rng);
    loc_conv.init(cfg.stem_channels, cfg.loc_channels, 3, 2, 1, rng);
    loc_fc1.init(cfg.loc_channels * 16, cfg.loc_hidden, rng);
    loc_fc2.init_zero(cfg.loc_hidden, 8);  // identity transform at initialization
    stage1.init(cfg.stem_channels, cfg.stage1_channels, rng);
    stage2.init(cfg.stage1_channels, cfg.stage2_channels, rng);
    stem_hw = stem.out_extent(cfg.image_size);
    s1_hw = stage1.conv1.out_extent(stem_hw);
    s2_hw = stage2.conv1.out_extent(s1_hw);
    head.init(cfg.stage2_channels * s2_hw * s2_hw, cfg.feature_dim, rng);
    head_ln.init(cfg.feature_dim);
  }

  void zero_like(const Encoder& o) {
    cfg = o.cfg;
    stem_hw = o.stem_hw;
    s1_hw = o.s1_hw;
    s2_hw = o.s2_hw;
    stem.zero_like(o.stem);
    loc_conv.zero_like(o.loc_conv);
    loc_fc1.zero_like(o.loc_fc1);
    loc_fc2.zero_like(o.loc_fc2);
    stage1.zero_like(o.stage1);
    stage2.zero_like(o.stage2);
    head.zero_like(o.head);
    head_ln.zero_like(o.head_ln);
  }

  // Small regression head over the stem activation; offsets are added to the
  // identity, the scale entry stays fixed at 1.
  VecX<S> localize(const FeatureMap<S>& feat, EncoderCache<S>& c) const {
    c.loc_pre = loc_conv.forward(feat, c.loc_cols);
    c.relu_margin = std::min(c.relu_margin, nn::min_abs(c.loc_pre.data));
    c.loc_act = c.loc_pre;
    nn::relu_inplace(c.loc_act.data);
    c.loc_pooled = nn::adaptive_avg_pool(c.loc_act, 4, 4);
    c.loc_flat = Eigen::Map<const VecX<S>>(c.loc_pooled.data.data(), c.loc_pooled.data.size());
    MatX<S> h_pre = loc_fc1.forward(c.loc_flat);
    c.relu_margin = std::min(c.relu_margin, nn::min_abs(h_pre));
    nn::relu_inplace(h_pre);
    c.loc_hidden_post = h_pre;
    c.theta = loc_fc2.forward(c.loc_hidden_post);
    return c.theta;
  }

  // Standalone localization, as used by tests and tooling.
  Homography localize_homography(const FeatureMap<S>& feat) const {
    if (feat.data.size() == 0) throw std::invalid_argument("localize: empty feature map");
    EncoderCache<S> scratch;
    localize(feat, scratch);
    Homography h;
    h.m = theta_to_matrix(scratch.theta).template cast<double>();
    return h.normalized();
  }

  static Eigen::Matrix<S, 3, 3> theta_to_matrix(const VecX<S>& theta) {
    Eigen::Matrix<S, 3, 3> h = Eigen::Matrix<S, 3, 3>::Identity();
    h(0, 0) += theta[0];
    h(0, 1) += theta[1];
    h(0, 2) += theta[2];
    h(1, 0) += theta[3];
    h(1, 1) += theta[4];
    h(1, 2) += theta[5];
    h(2, 0) += theta[6];
    h(2, 1) += theta[7];
    return h;
  }

  FeaturePyramid<S> forward(const FeatureMap<S>& x, EncoderCache<S>& c) const {
    if (x.channels != cfg.in_channels || x.height != cfg.image_size || x.width != cfg.image_size)
      throw std::invalid_argument("encoder: input shape mismatch");
    c = EncoderCache<S>{};
    c.x = x;

    c.stem_pre = stem.forward(x, c.stem_cols);
    c.relu_margin = std::min(c.relu_margin, nn::min_abs(c.stem_pre.data));
    c.stem_act = c.stem_pre;
    nn::relu_inplace(c.stem_act.data);

    if (cfg.stn_enabled) {
      localize(c.stem_act, c);
      c.hmat = theta_to_matrix(c.theta);
      c.stn_out = warp_forward(c.stem_act, c.hmat, &c.warp);
    } else {
      c.hmat = Eigen::Matrix<S, 3, 3>::Identity();
      c.stn_out = c.stem_act;
    }

    c.m1 = stage1.forward(c.stn_out, c.s1);
    c.m2 = stage2.forward(c.m1, c.s2);
    c.relu_margin = std::min({c.relu_margin, c.s1.relu_margin, c.s2.relu_margin});

    c.flat = Eigen::Map<const VecX<S>>(c.m2.data.data(), c.m2.data.size());
    c.head_pre = head.forward(c.flat);
    VecX<S> normed = head_ln.forward(c.head_pre, c.head_norm);
    c.embedding = normed.array().tanh().matrix();

    FeaturePyramid<S> pyr;
    pyr.maps.emplace_back("stn", c.stn_out);
    pyr.maps.emplace_back("stage1", c.m1);
    pyr.maps.emplace_back("stage2", c.m2);
    pyr.embedding = c.embedding;
    pyr.homography = c.hmat;
    return pyr;
  }

  // Accumulates into `grad`; optionally reports dL/d(stage2 map) before the
  // stage backward (the hook attention maps are built on).
  void backward(const EncoderCache<S>& c, const EncoderSeeds<S>& seeds, Encoder& grad,
                FeatureMap<S>* d_stage2_probe = nullptr) const {
    // head
    FeatureMap<S> d_m2(c.m2.channels, c.m2.height, c.m2.width);
    if (seeds.d_embedding.size()) {
      VecX<S> d_normed =
          (seeds.d_embedding.array() * (S(1) - c.embedding.array().square())).matrix();
      VecX<S> d_head_pre = head_ln.backward(c.head_norm, d_normed, grad.head_ln);
      MatX<S> d_flat = head.backward(c.flat, d_head_pre, grad.head);
      d_m2.data = Eigen::Map<const MatX<S>>(d_flat.data(), c.m2.data.rows(), c.m2.data.cols());
    }
    if (auto it = seeds.d_maps.find("stage2"); it != seeds.d_maps.end())
      d_m2.data += it->second.data;
    if (d_stage2_probe) *d_stage2_probe = d_m2;

    FeatureMap<S> d_m1 = stage2.backward(c.m1, c.s2, d_m2, grad.stage2);
    if (auto it = seeds.d_maps.find("stage1"); it != seeds.d_maps.end())
      d_m1.data += it->second.data;

    FeatureMap<S> d_stn = stage1.backward(c.stn_out, c.s1, d_m1, grad.stage1);
    if (auto it = seeds.d_maps.find("stn"); it != seeds.d_maps.end())
      d_stn.data += it->second.data;

    FeatureMap<S> d_stem_act(c.stem_act.channels, c.stem_act.height, c.stem_act.width);
    if (cfg.stn_enabled) {
      Eigen::Matrix<S, 3, 3> dh = Eigen::Matrix<S, 3, 3>::Zero();
      warp_backward(c.stem_act, c.hmat, c.warp, d_stn, d_stem_act, dh);
      // back into the localization head; the fixed (2,2) entry is dropped
      VecX<S> d_theta(8);
      d_theta << dh(0, 0), dh(0, 1), dh(0, 2), dh(1, 0), dh(1, 1), dh(1, 2), dh(2, 0), dh(2, 1);
      MatX<S> d_hidden = loc_fc2.backward(c.loc_hidden_post, d_theta, grad.loc_fc2);
      d_hidden = nn::relu_backward(c.loc_hidden_post, d_hidden);
      MatX<S> d_flat = loc_fc1.backward(c.loc_flat, d_hidden, grad.loc_fc1);
      FeatureMap<S> d_pooled(c.loc_pooled.channels, c.loc_pooled.height, c.loc_pooled.width);
      d_pooled.data =
          Eigen::Map<const MatX<S>>(d_flat.data(), d_pooled.data.rows(), d_pooled.data.cols());
      FeatureMap<S> d_loc_act =
          nn::adaptive_avg_pool_backward(c.loc_act, 4, 4, d_pooled);
      d_loc_act.data = nn::relu_backward(c.loc_act.data, d_loc_act.data);
      d_stem_act.data += loc_conv.backward(c.stem_act, c.loc_cols, d_loc_act, grad.loc_conv).data;
    } else {
      d_stem_act.data = d_stn.data;
    }

    FeatureMap<S> d_stem_pre = d_stem_act;
    d_stem_pre.data = nn::relu_backward(c.stem_act.data, d_stem_act.data);
    stem.backward(c.x, c.stem_cols, d_stem_pre, grad.stem);
  }

  void collect(const std::string& p, std::vector<TensorRef<S>>& out) {
    stem.collect(p + ".stem", out);
    loc_conv.collect(p + ".loc_conv", out);
    loc_fc1.collect(p + ".loc_fc1", out);
    loc_fc2.collect(p + ".loc_fc2", out);
    stage1.collect(p + ".stage1", out);
    stage2.collect(p + ".stage2", out);
    head.collect(p + ".head", out);
    head_ln.collect(p + ".head_ln", out);
  }

  // downsampling factors of the pyramid entries relative to the input
  static std::map<std::string, int> downsampling_factors() {
    return {{"stn", 2}, {"stage1", 4}, {"stage2", 8}};
  }
};

// Stacked frames to network input: 4 channels per frame, oldest frame first,
// codes mapped to [-0.5, 0.5].
template <class S>
FeatureMap<S> obs_to_input(const sim::FrameStack& stack) {
  if (stack.frames.empty()) throw std::invalid_argument("obs_to_input: empty stack");
  const int h = stack.frames[0].height, w = stack.frames[0].width;
  FeatureMap<S> x(int(stack.frames.size()) * 4, h, w);
  for (size_t f = 0; f < stack.frames.size(); ++f) {
    const Image8& img = stack.frames[f];
    if (img.channels != 4) throw std::invalid_argument("obs_to_input: expected RGBD frames");
    for (int p = 0; p < h * w; ++p)
      for (int ch = 0; ch < 4; ++ch)
        x.data(int(f) * 4 + ch, p) = S(img.data[size_t(p) * 4 + ch]) / S(255) - S(0.5);
  }
  return x;
}

}  // namespace mvrl::encoder
