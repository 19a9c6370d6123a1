#pragma once

#include "mvrl/nn/layers.hpp"

namespace mvrl::agent {

using nn::Linear;
using nn::MatX;
using nn::TensorRef;
using nn::VecX;

// Two hidden relu layers; columns are batch samples.
template <class S>
struct Mlp3 {
  Linear<S> l1, l2, l3;

  struct Cache {
    MatX<S> x, h1, h2, out;  // h1/h2 post-relu
  };

  void init(int in, int hidden, int out, Rng& rng) {
    l1.init(in, hidden, rng);
    l2.init(hidden, hidden, rng);
    l3.init(hidden, out, rng);
  }

  void zero_like(const Mlp3& o) {
    l1.zero_like(o.l1);
    l2.zero_like(o.l2);
    l3.zero_like(o.l3);
  }

  MatX<S> forward(const MatX<S>& x, Cache& c) const {
    c.x = x;
    c.h1 = l1.forward(x);
    nn::relu_inplace(c.h1);
    c.h2 = l2.forward(c.h1);
    nn::relu_inplace(c.h2);
    c.out = l3.forward(c.h2);
    return c.out;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& dout, Mlp3& grad) const {
    MatX<S> dh2 = l3.backward(c.h2, dout, grad.l3);
    dh2 = nn::relu_backward(c.h2, dh2);
    MatX<S> dh1 = l2.backward(c.h1, dh2, grad.l2);
    dh1 = nn::relu_backward(c.h1, dh1);
    return l1.backward(c.x, dh1, grad.l1);
  }

  void collect(const std::string& p, std::vector<TensorRef<S>>& out) {
    l1.collect(p + ".l1", out);
    l2.collect(p + ".l2", out);
    l3.collect(p + ".l3", out);
  }
};

// Deterministic policy head: embedding -> tanh-bounded action.
template <class S>
struct Actor {
  Mlp3<S> mlp;

  struct Cache {
    typename Mlp3<S>::Cache mlp;
    MatX<S> action;  // post tanh
  };

  void init(int emb_dim, int hidden, int action_dim, Rng& rng) {
    mlp.init(emb_dim, hidden, action_dim, rng);
  }
  void zero_like(const Actor& o) { mlp.zero_like(o.mlp); }

  MatX<S> forward(const MatX<S>& emb, Cache& c) const {
    MatX<S> pre = mlp.forward(emb, c.mlp);
    c.action = pre.array().tanh().matrix();
    return c.action;
  }

  MatX<S> backward(const Cache& c, const MatX<S>& d_action, Actor& grad) const {
    MatX<S> dpre = (d_action.array() * (S(1) - c.action.array().square())).matrix();
    return mlp.backward(c.mlp, dpre, grad.mlp);
  }

  void collect(const std::string& p, std::vector<TensorRef<S>>& out) { mlp.collect(p, out); }
};

// Q head over [embedding; action]; penultimate() is what embedding exports use.
template <class S>
struct Critic {
  Mlp3<S> mlp;
  int emb_dim = 0;

  struct Cache {
    typename Mlp3<S>::Cache mlp;
  };

  void init(int emb, int hidden, int action_dim, Rng& rng) {
    emb_dim = emb;
    mlp.init(emb + action_dim, hidden, 1, rng);
  }
  void zero_like(const Critic& o) {
    emb_dim = o.emb_dim;
    mlp.zero_like(o.mlp);
  }

  MatX<S> forward(const MatX<S>& emb, const MatX<S>& action, Cache& c) const {
    MatX<S> x(emb.rows() + action.rows(), emb.cols());
    x << emb, action;
    return mlp.forward(x, c.mlp);
  }

  // returns (d_emb, d_action) stacked, split by the caller
  MatX<S> backward(const Cache& c, const MatX<S>& dq, Critic& grad) const {
    return mlp.backward(c.mlp, dq, grad.mlp);
  }

  const MatX<S>& penultimate(const Cache& c) const { return c.mlp.h2; }

  void collect(const std::string& p, std::vector<TensorRef<S>>& out) { mlp.collect(p, out); }
};

}  // namespace mvrl::agent
