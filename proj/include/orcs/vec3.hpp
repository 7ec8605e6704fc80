#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace orcs {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int axis) const noexcept { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) noexcept { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) noexcept {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) noexcept {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  constexpr Vec3& operator*=(double s) noexcept {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) noexcept { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) noexcept { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) noexcept { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) noexcept { return a *= s; }
  friend constexpr Vec3 operator-(const Vec3& a) noexcept { return {-a.x, -a.y, -a.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double norm2(const Vec3& a) noexcept { return dot(a, a); }
inline double norm(const Vec3& a) noexcept { return std::sqrt(norm2(a)); }

inline bool is_finite(const Vec3& a) noexcept {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

inline Vec3 min(const Vec3& a, const Vec3& b) noexcept {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3& a, const Vec3& b) noexcept {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

/// Axis-aligned box. A default-constructed box is empty (min > max) so it is
/// the identity for expand().
struct Aabb {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  static Aabb around_sphere(const Vec3& center, double radius) noexcept {
    const Vec3 r{radius, radius, radius};
    return {center - r, center + r};
  }

  bool empty() const noexcept { return min.x > max.x || min.y > max.y || min.z > max.z; }

  void expand(const Aabb& o) noexcept {
    min = orcs::min(min, o.min);
    max = orcs::max(max, o.max);
  }

  bool contains(const Vec3& p) const noexcept {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }

  /// Containment with the box grown by `slack` on every side.
  bool contains(const Vec3& p, double slack) const noexcept {
    return p.x >= min.x - slack && p.x <= max.x + slack && p.y >= min.y - slack &&
           p.y <= max.y + slack && p.z >= min.z - slack && p.z <= max.z + slack;
  }

  bool contains(const Aabb& o) const noexcept {
    return o.min.x >= min.x && o.min.y >= min.y && o.min.z >= min.z && o.max.x <= max.x &&
           o.max.y <= max.y && o.max.z <= max.z;
  }

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

inline Aabb merge(Aabb a, const Aabb& b) noexcept {
  a.expand(b);
  return a;
}

}  // namespace orcs
