#pragma once

#include <cmath>
#include <vector>

#include "mvrl/nn/tensor.hpp"

namespace mvrl::nn {

// Adam over a fixed list of (param, grad) tensor pairs. Construct after the
// parameter lists are final; state is positional and serialized by index.
template <class S>
class Adam {
 public:
  Adam() = default;

  void attach(std::vector<TensorRef<S>> params, std::vector<TensorRef<S>> grads, double lr) {
    params_ = std::move(params);
    grads_ = std::move(grads);
    lr_ = lr;
    m_.clear();
    v_.clear();
    for (const auto& p : params_) {
      m_.push_back(MatX<S>::Zero(p.tensor->rows(), p.tensor->cols()));
      v_.push_back(MatX<S>::Zero(p.tensor->rows(), p.tensor->cols()));
    }
    t_ = 0;
  }

  void step() {
    t_ += 1;
    const double bc1 = 1.0 - std::pow(beta1_, double(t_));
    const double bc2 = 1.0 - std::pow(beta2_, double(t_));
    const S alpha = S(lr_ * std::sqrt(bc2) / bc1);
    for (size_t i = 0; i < params_.size(); ++i) {
      MatX<S>& p = *params_[i].tensor;
      const MatX<S>& g = *grads_[i].tensor;
      m_[i] = S(beta1_) * m_[i] + S(1.0 - beta1_) * g;
      v_[i] = S(beta2_) * v_[i].array().matrix() +
              S(1.0 - beta2_) * g.array().square().matrix();
      p.array() -= alpha * m_[i].array() / (v_[i].array().sqrt() + S(eps_));
    }
  }

  int64_t t() const { return t_; }
  double lr() const { return lr_; }
  size_t size() const { return params_.size(); }
  MatX<S>& moment1(size_t i) { return m_[i]; }
  MatX<S>& moment2(size_t i) { return v_[i]; }
  void set_t(int64_t t) { t_ = t; }

 private:
  std::vector<TensorRef<S>> params_, grads_;
  std::vector<MatX<S>> m_, v_;
  double lr_ = 1e-4;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int64_t t_ = 0;
};

}  // namespace mvrl::nn
