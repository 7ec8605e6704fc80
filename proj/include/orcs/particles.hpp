#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "orcs/error.hpp"
#include "orcs/vec3.hpp"

namespace orcs {

/// Simulation state. Positions, velocities, forces and radii are parallel
/// arrays indexed by particle id. Unit mass is implied.
struct ParticleSystem {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Vec3> forces;
  std::vector<double> radii;
  bool uniform_radius = true;
  double max_radius = 0.0;

  ParticleSystem() = default;

  explicit ParticleSystem(std::size_t n)
      : positions(n), velocities(n), forces(n), radii(n, 1.0), max_radius(n ? 1.0 : 0.0) {}

  ParticleSystem(std::vector<Vec3> pos, std::vector<double> r)
      : positions(std::move(pos)), velocities(positions.size()), forces(positions.size()),
        radii(std::move(r)) {
    if (radii.size() != positions.size()) {
      throw StructuralError("radii and positions differ in length");
    }
    refresh_radius_info();
  }

  std::size_t size() const noexcept { return positions.size(); }

  /// Recompute uniform_radius / max_radius after radii were edited.
  void refresh_radius_info() {
    max_radius = 0.0;
    uniform_radius = true;
    for (double r : radii) {
      if (!(r > 0.0)) {
        throw ConfigError("radius", "search radii must be positive");
      }
      max_radius = std::max(max_radius, r);
      if (r != radii.front()) {
        uniform_radius = false;
      }
    }
  }

  void clear_forces() { std::fill(forces.begin(), forces.end(), Vec3{}); }
};

}  // namespace orcs
