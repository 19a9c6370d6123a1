#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace mvrl::encoder {

// 3x3 perspective transform mapping target grid coordinates to source
// coordinates in the normalized [-1,1] frame. Kept with m(2,2) == 1.
struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  static Homography identity() { return {}; }

  // offsets laid out row-major over the 8 free entries; m(2,2) stays 1
  static Homography from_offsets(const Eigen::Matrix<double, 8, 1>& theta) {
    Homography h;
    h.m(0, 0) += theta[0];
    h.m(0, 1) += theta[1];
    h.m(0, 2) += theta[2];
    h.m(1, 0) += theta[3];
    h.m(1, 1) += theta[4];
    h.m(1, 2) += theta[5];
    h.m(2, 0) += theta[6];
    h.m(2, 1) += theta[7];
    return h;
  }

  static Homography translation(double dx, double dy) {
    Homography h;
    h.m(0, 2) = dx;
    h.m(1, 2) = dy;
    return h;
  }

  double det() const { return m.determinant(); }
  bool invertible() const { return std::abs(det()) > 1e-9; }

  Homography normalized() const {
    if (std::abs(m(2, 2)) < 1e-12) throw std::invalid_argument("homography: zero scale entry");
    Homography h;
    h.m = m / m(2, 2);
    return h;
  }

  Homography inverse() const {
    if (!invertible()) throw std::invalid_argument("homography: not invertible");
    Homography h;
    h.m = m.inverse();
    return h.normalized();
  }
};

}  // namespace mvrl::encoder
