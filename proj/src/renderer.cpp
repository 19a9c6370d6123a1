#include "mvrl/sim/renderer.hpp"

#include <algorithm>
#include <cmath>

namespace mvrl::sim {

namespace {

constexpr double kNearClip = 0.05;
const Eigen::Vector3d kLightDir = Eigen::Vector3d(0.35, -0.25, 0.90).normalized();

struct ClipVert {
  Eigen::Vector3d cam;
};

// Sutherland-Hodgman against the z >= near plane; a triangle clips to at most
// a quad, returned as a small polygon.
int clip_near(const ClipVert in[3], ClipVert out[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVert& a = in[i];
    const ClipVert& b = in[(i + 1) % 3];
    const bool a_in = a.cam.z() >= kNearClip;
    const bool b_in = b.cam.z() >= kNearClip;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (kNearClip - a.cam.z()) / (b.cam.z() - a.cam.z());
      out[n++] = {a.cam + t * (b.cam - a.cam)};
    }
  }
  return n;
}

}  // namespace

void add_box(std::vector<Triangle>& out, const Eigen::Vector3d& c, const Eigen::Vector3d& h,
             Rgb color, uint16_t id) {
  const double xs[2] = {c.x() - h.x(), c.x() + h.x()};
  const double ys[2] = {c.y() - h.y(), c.y() + h.y()};
  const double zs[2] = {c.z() - h.z(), c.z() + h.z()};
  Eigen::Vector3d v[8];
  for (int i = 0; i < 8; ++i)
    v[i] = Eigen::Vector3d(xs[i & 1], ys[(i >> 1) & 1], zs[(i >> 2) & 1]);
  // each face wound counter-clockwise seen from outside
  static const int faces[6][4] = {
    {0, 2, 3, 1},  // bottom (-z)
    {4, 5, 7, 6},  // top (+z)
    {0, 1, 5, 4},  // -y
    {2, 6, 7, 3},  // +y
    {0, 4, 6, 2},  // -x
    {1, 3, 7, 5},  // +x
  };
  for (const auto& f : faces) {
    out.push_back({v[f[0]], v[f[1]], v[f[2]], color, id});
    out.push_back({v[f[0]], v[f[2]], v[f[3]], color, id});
  }
}

void add_cylinder(std::vector<Triangle>& out, const Eigen::Vector3d& base, double radius,
                  double height, Rgb color, uint16_t id, int sides) {
  const Eigen::Vector3d top = base + Eigen::Vector3d(0, 0, height);
  for (int i = 0; i < sides; ++i) {
    const double a0 = 2.0 * M_PI * i / sides;
    const double a1 = 2.0 * M_PI * (i + 1) / sides;
    const Eigen::Vector3d r0(radius * std::cos(a0), radius * std::sin(a0), 0);
    const Eigen::Vector3d r1(radius * std::cos(a1), radius * std::sin(a1), 0);
    out.push_back({base + r0, base + r1, top + r1, color, id});
    out.push_back({base + r0, top + r1, top + r0, color, id});
    out.push_back({top, top + r0, top + r1, color, id});
    out.push_back({base, base + r1, base + r0, color, id});
  }
}

RenderOut render_triangles(const std::vector<Triangle>& tris, const CameraPose& pose,
                           const Eigen::Vector3d& look_at, int width, int height, Rgb bg) {
  const CameraFrame cam = make_camera_frame(pose, look_at, width, height);

  RenderOut out;
  out.rgb = Image8(width, height, 3);
  out.depth_m = PlaneF(width, height, 1e9f);
  out.ids.assign(size_t(width) * height, kIdBackground);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      out.rgb.at(x, y, 0) = bg.r;
      out.rgb.at(x, y, 1) = bg.g;
      out.rgb.at(x, y, 2) = bg.b;
    }

  const double cx = 0.5 * width;
  const double cy = 0.5 * height;

  for (const Triangle& tri : tris) {
    // flat shade in world space
    const Eigen::Vector3d n = (tri.v1 - tri.v0).cross(tri.v2 - tri.v0);
    const double nn = n.norm();
    if (nn <= 0.0) continue;
    const double shade = 0.55 + 0.45 * std::max(0.0, n.dot(kLightDir) / nn);
    const uint8_t cr = uint8_t(std::min(255.0, std::round(tri.color.r * shade)));
    const uint8_t cg = uint8_t(std::min(255.0, std::round(tri.color.g * shade)));
    const uint8_t cb = uint8_t(std::min(255.0, std::round(tri.color.b * shade)));

    const ClipVert cv[3] = {{cam.to_camera(tri.v0)}, {cam.to_camera(tri.v1)}, {cam.to_camera(tri.v2)}};
    ClipVert poly[4];
    const int npoly = clip_near(cv, poly);
    if (npoly < 3) continue;

    for (int k = 2; k < npoly; ++k) {
      const Eigen::Vector3d& p0 = poly[0].cam;
      const Eigen::Vector3d& p1 = poly[k - 1].cam;
      const Eigen::Vector3d& p2 = poly[k].cam;
      // screen coords and 1/z for perspective-correct depth
      const double inv0 = 1.0 / p0.z(), inv1 = 1.0 / p1.z(), inv2 = 1.0 / p2.z();
      const double x0 = cam.focal_px * p0.x() * inv0 + cx, y0 = cam.focal_px * p0.y() * inv0 + cy;
      const double x1 = cam.focal_px * p1.x() * inv1 + cx, y1 = cam.focal_px * p1.y() * inv1 + cy;
      const double x2 = cam.focal_px * p2.x() * inv2 + cx, y2 = cam.focal_px * p2.y() * inv2 + cy;

      const double area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
      if (std::abs(area) < 1e-12) continue;

      const int min_x = std::max(0, int(std::floor(std::min({x0, x1, x2}))));
      const int max_x = std::min(width - 1, int(std::ceil(std::max({x0, x1, x2}))));
      const int min_y = std::max(0, int(std::floor(std::min({y0, y1, y2}))));
      const int max_y = std::min(height - 1, int(std::ceil(std::max({y0, y1, y2}))));

      const double inv_area = 1.0 / area;
      for (int py = min_y; py <= max_y; ++py) {
        for (int px = min_x; px <= max_x; ++px) {
          const double sx = px + 0.5, sy = py + 0.5;
          double w0 = ((x1 - sx) * (y2 - sy) - (x2 - sx) * (y1 - sy)) * inv_area;
          double w1 = ((x2 - sx) * (y0 - sy) - (x0 - sx) * (y2 - sy)) * inv_area;
          double w2 = 1.0 - w0 - w1;
          if (w0 < 0 || w1 < 0 || w2 < 0) continue;
          const double inv_z = w0 * inv0 + w1 * inv1 + w2 * inv2;
          const float z = float(1.0 / inv_z);
          float& zbuf = out.depth_m.at(px, py);
          if (z < zbuf) {
            zbuf = z;
            out.rgb.at(px, py, 0) = cr;
            out.rgb.at(px, py, 1) = cg;
            out.rgb.at(px, py, 2) = cb;
            out.ids[size_t(py) * width + px] = tri.id;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace mvrl::sim
