#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "mvrl/core/rng.hpp"

namespace mvrl::sim {

// One randomized parameter. Additive entries sample value = center + u*m*half_range,
// multiplicative ones sample value = center * (1 + u*m*half_range), u ~ U[-1,1].
struct RangeEntry {
  double center = 0.0;
  double half_range = 0.0;
  bool multiplicative = false;

  double sample(Rng& rng, double magnitude) const {
    const double u = rng.uniform(-1.0, 1.0);
    if (multiplicative) return center * (1.0 + u * magnitude * half_range);
    return center + u * magnitude * half_range;
  }

  double lo(double magnitude = 1.0) const {
    return multiplicative ? center * (1.0 - magnitude * half_range) : center - magnitude * half_range;
  }
  double hi(double magnitude = 1.0) const {
    return multiplicative ? center * (1.0 + magnitude * half_range) : center + magnitude * half_range;
  }
};

struct RandomizationSpec {
  std::map<std::string, RangeEntry> entries;

  const RangeEntry& at(const std::string& name) const {
    auto it = entries.find(name);
    if (it == entries.end()) throw std::invalid_argument("randomization entry missing: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return entries.count(name) != 0; }

  void validate() const {
    for (const auto& [name, e] : entries) {
      if (e.half_range < 0.0)
        throw std::invalid_argument("randomization entry " + name + ": negative half_range");
      if (e.multiplicative && e.center <= 0.0)
        throw std::invalid_argument("randomization entry " + name +
                                    ": multiplicative entries need center > 0");
    }
  }
};

// Built-in ranges: joint factors +/-10%, cube 0.05*(1+/-0.1) m, table height +/-0.01 m,
// pitch [10.5,30.5] deg, yaw [-60,60] deg, fov [38,46] deg, distance [1.12,1.54] m,
// camera height +/-3 cm, action delay [0,2] steps, control timestep [0.016,0.024] s.
inline RandomizationSpec default_randomization() {
  RandomizationSpec s;
  s.entries["joint_damping"] = {1.0, 0.1, true};
  s.entries["joint_armature"] = {1.0, 0.1, true};
  s.entries["object_size"] = {0.05, 0.1, true};
  s.entries["table_height"] = {0.0, 0.01, false};
  s.entries["camera_pitch"] = {20.5, 10.0, false};
  s.entries["camera_yaw"] = {0.0, 60.0, false};
  s.entries["camera_fov"] = {42.0, 4.0, false};
  s.entries["camera_distance"] = {1.33, 0.21, false};
  s.entries["camera_height"] = {0.0, 0.03, false};
  s.entries["action_delay"] = {1.0, 1.0, false};
  s.entries["control_timestep"] = {0.020, 0.004, false};
  return s;
}

}  // namespace mvrl::sim

namespace mvrl::curriculum {

// Shrinks every half range by m; centers are untouched.
inline sim::RandomizationSpec scaled_spec(const sim::RandomizationSpec& spec, double m) {
  if (m < 0.0 || m > 1.0) throw std::invalid_argument("scaled_spec: magnitude outside [0,1]");
  sim::RandomizationSpec out = spec;
  for (auto& [name, e] : out.entries) e.half_range *= m;
  return out;
}

}  // namespace mvrl::curriculum
