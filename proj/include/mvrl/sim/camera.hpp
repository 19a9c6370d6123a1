#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "mvrl/sim/randomization.hpp"

namespace mvrl::sim {

// Orbit camera around a look-at point. Yaw rotates about world z, pitch is
// elevation above the horizontal plane, distance is measured from the look-at
// point, height_offset shifts the eye vertically after the orbit placement.
struct CameraPose {
  double pitch_deg = 20.5;
  double yaw_deg = 0.0;
  double fov_deg = 42.0;
  double distance_m = 1.33;
  double height_offset_m = 0.0;

  bool valid() const { return distance_m > 0.0 && fov_deg > 0.0 && fov_deg < 180.0; }
};

inline CameraPose sample_camera_pose(const RandomizationSpec& spec, Rng& rng, double magnitude) {
  CameraPose p;
  p.pitch_deg = spec.at("camera_pitch").sample(rng, magnitude);
  p.yaw_deg = spec.at("camera_yaw").sample(rng, magnitude);
  p.fov_deg = spec.at("camera_fov").sample(rng, magnitude);
  p.distance_m = spec.at("camera_distance").sample(rng, magnitude);
  p.height_offset_m = spec.at("camera_height").sample(rng, magnitude);
  return p;
}

inline CameraPose midpoint_camera_pose(const RandomizationSpec& spec) {
  CameraPose p;
  p.pitch_deg = spec.at("camera_pitch").center;
  p.yaw_deg = spec.at("camera_yaw").center;
  p.fov_deg = spec.at("camera_fov").center;
  p.distance_m = spec.at("camera_distance").center;
  p.height_offset_m = spec.at("camera_height").center;
  return p;
}

// World-to-camera rigid transform plus the projection scale for a pinhole
// camera with vertical field of view. Camera looks down +z in its own frame.
struct CameraFrame {
  Eigen::Matrix3d rot;      // world -> camera rotation
  Eigen::Vector3d eye;      // camera position in world
  double focal_px = 0.0;    // pixels, from vertical fov
  int width = 0, height = 0;

  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const { return rot * (world - eye); }
};

inline CameraFrame make_camera_frame(const CameraPose& pose, const Eigen::Vector3d& look_at,
                                     int width, int height) {
  if (!pose.valid()) throw std::invalid_argument("degenerate camera pose");
  const double pitch = pose.pitch_deg * M_PI / 180.0;
  const double yaw = pose.yaw_deg * M_PI / 180.0;

  CameraFrame f;
  f.width = width;
  f.height = height;
  f.eye = look_at + pose.distance_m * Eigen::Vector3d(std::cos(pitch) * std::sin(yaw),
                                                      -std::cos(pitch) * std::cos(yaw),
                                                      std::sin(pitch));
  f.eye.z() += pose.height_offset_m;

  const Eigen::Vector3d forward = (look_at - f.eye).normalized();
  Eigen::Vector3d up(0, 0, 1);
  Eigen::Vector3d right = forward.cross(up).normalized();
  Eigen::Vector3d down = forward.cross(right);  // image y grows downward
  f.rot.row(0) = right.transpose();
  f.rot.row(1) = down.transpose();
  f.rot.row(2) = forward.transpose();

  const double fov = pose.fov_deg * M_PI / 180.0;
  f.focal_px = 0.5 * double(height) / std::tan(0.5 * fov);
  return f;
}

}  // namespace mvrl::sim
