#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "mvrl/core/image.hpp"
#include "mvrl/sim/camera.hpp"

namespace mvrl::sim {

enum PrimitiveId : uint16_t {
  kIdBackground = 0,
  kIdFloor = 1,
  kIdTable = 2,
  kIdBasePillar = 3,
  kIdEffector = 4,
  kIdObject = 5,
};

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
};

struct Triangle {
  Eigen::Vector3d v0, v1, v2;
  Rgb color;
  uint16_t id = 0;
};

// Scene palette; appearance sweeps swap these out per condition.
struct Palette {
  Rgb background{168, 198, 222};
  Rgb floor{92, 96, 102};
  Rgb table{152, 112, 72};
  Rgb base{52, 62, 142};
  Rgb effector{46, 198, 66};
  Rgb effector_grasp{120, 240, 120};
  Rgb object{221, 42, 38};
};

struct SceneGeometry {
  Eigen::Vector3d table_half{0.30, 0.22, 0.02};
  double floor_top_z = -0.30;
  Eigen::Vector2d base_xy{-0.26, 0.0};
  double base_radius = 0.03;
  double base_height = 0.18;
  double effector_radius = 0.015;
  double effector_height = 0.10;
};

void add_box(std::vector<Triangle>& out, const Eigen::Vector3d& center,
             const Eigen::Vector3d& half, Rgb color, uint16_t id);
void add_cylinder(std::vector<Triangle>& out, const Eigen::Vector3d& base_center, double radius,
                  double height, Rgb color, uint16_t id, int sides = 20);

struct RenderOut {
  Image8 rgb;                 // H x W x 3
  PlaneF depth_m;             // camera-space depth in meters; background = 1e9
  std::vector<uint16_t> ids;  // primitive id per pixel, row-major
};

// Flat-shaded z-buffered rasterization with a fixed directional light.
RenderOut render_triangles(const std::vector<Triangle>& tris, const CameraPose& pose,
                           const Eigen::Vector3d& look_at, int width, int height, Rgb background);

}  // namespace mvrl::sim
