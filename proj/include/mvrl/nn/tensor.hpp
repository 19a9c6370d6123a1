#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "mvrl/core/rng.hpp"

namespace mvrl::nn {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Dense activation map: channels x (height*width), column index = y*width + x.
template <class S>
struct FeatureMap {
  int channels = 0, height = 0, width = 0;
  MatX<S> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w) : channels(c), height(h), width(w), data(MatX<S>::Zero(c, h * w)) {}

  int pixels() const { return height * width; }
  bool same_shape(const FeatureMap& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  void set_zero() { data.setZero(); }
};

// Named view over a parameter tensor; optimizer, serialization and the
// finite-difference harness all walk these lists.
template <class S>
struct TensorRef {
  std::string name;
  MatX<S>* tensor = nullptr;
};

template <class S>
void check_finite(const MatX<S>& m, const char* what) {
  if (!m.allFinite()) throw std::runtime_error(std::string("non-finite values in ") + what);
}

}  // namespace mvrl::nn
