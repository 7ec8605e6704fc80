#pragma once

#include <cmath>
#include <string_view>

#include "orcs/error.hpp"
#include "orcs/vec3.hpp"

namespace orcs {

enum class BoundaryKind { Wall, Periodic };

inline std::string_view to_string(BoundaryKind kind) noexcept {
  return kind == BoundaryKind::Wall ? "wall" : "periodic";
}

/// Cubic simulation box [0, L]^3.
struct Domain {
  double side_length = 1000.0;
  BoundaryKind bc = BoundaryKind::Wall;

  Domain() = default;
  Domain(double side, BoundaryKind kind) : side_length(side), bc(kind) {
    if (!(side > 0.0) || !std::isfinite(side)) {
      throw ConfigError("box", "side length must be positive and finite");
    }
  }

  bool periodic() const noexcept { return bc == BoundaryKind::Periodic; }

  bool inside(const Vec3& p) const noexcept {
    return p.x >= 0.0 && p.x <= side_length && p.y >= 0.0 && p.y <= side_length && p.z >= 0.0 &&
           p.z <= side_length;
  }
};

/// Displacement b - a. Under periodic boundaries each component is folded to
/// the nearest image, so |component| <= L/2. The fold is written so that
/// min_image_delta(a, b) == -min_image_delta(b, a) bit for bit.
inline Vec3 min_image_delta(const Vec3& a, const Vec3& b, const Domain& domain) noexcept {
  Vec3 d = b - a;
  if (domain.periodic()) {
    const double L = domain.side_length;
    const double half = 0.5 * L;
    for (int c = 0; c < 3; ++c) {
      const double v = d[c];
      d[c] = v > half ? v - L : (v < -half ? v + L : v);
    }
  }
  return d;
}

}  // namespace orcs
