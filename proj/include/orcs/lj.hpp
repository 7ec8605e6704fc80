#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "orcs/domain.hpp"
#include "orcs/error.hpp"
#include "orcs/parallel.hpp"
#include "orcs/particles.hpp"

namespace orcs {

enum class ForceForm {
  /// 24 eps [(s/r)^12 - (s/r)^6] / r, i.e. the potential bracket scaled by 24/r.
  PotentialBracket,
  /// -dU/dr = 24 eps [2 (s/r)^12 - (s/r)^6] / r.
  Standard,
};

struct LjParams {
  double epsilon = 1.0;
  double sigma = 1.0;
  ForceForm force_form = ForceForm::PotentialBracket;
  double r_min_guard = 0.5;  // distances below this are evaluated at the guard
  double dt = 1e-4;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
    if (!(sigma > 0.0)) throw ConfigError("sigma", "must be positive");
    if (!(r_min_guard > 0.0 && r_min_guard < sigma)) throw ConfigError("r-min-guard", "must be in (0, sigma)");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be finite and non-negative");
  }
};

/// Truncated 12-6 potential: zero beyond r_c, no shift.
inline double lj_potential(double r, double r_c, const LjParams& p) noexcept {
  if (r > r_c) return 0.0;
  const double rr = std::max(r, p.r_min_guard);
  const double s6 = std::pow(p.sigma / rr, 6);
  return 4.0 * p.epsilon * (s6 * s6 - s6);
}

/// Scalar force along the pair axis, positive = repulsive.
inline double lj_force_magnitude(double r, double r_c, const LjParams& p) noexcept {
  if (r > r_c) return 0.0;
  const double rr = std::max(r, p.r_min_guard);
  const double sr = p.sigma / rr;
  const double s2 = sr * sr;
  const double s6 = s2 * s2 * s2;
  const double s12 = s6 * s6;
  const double repulsive = p.force_form == ForceForm::Standard ? 2.0 * s12 : s12;
  return 24.0 * p.epsilon * (repulsive - s6) / rr;
}

/// Force on i from j given the min-image displacement `delta` = p_j - p_i.
/// Coincident particles are pushed apart along x, lower index towards -x, so
/// the result stays antisymmetric in (i, j).
inline Vec3 pair_force_from_delta(const Vec3& delta, std::size_t i, std::size_t j, double r_c,
                                  const LjParams& p) noexcept {
  const double r2 = norm2(delta);
  if (r2 == 0.0) {
    const double f = lj_force_magnitude(0.0, r_c, p);
    return {i > j ? f : -f, 0.0, 0.0};
  }
  const double r = std::sqrt(r2);
  if (r > r_c) return {};
  const double scale = lj_force_magnitude(r, r_c, p) / r;
  return delta * -scale;
}

/// Force on particle i from particle j; the force on j is its negation.
inline Vec3 pair_force(std::size_t i, std::size_t j, const ParticleSystem& ps, const Domain& domain,
                       double r_c_pair, const LjParams& p) noexcept {
  return pair_force_from_delta(min_image_delta(ps.positions[i], ps.positions[j], domain), i, j, r_c_pair, p);
}

/// Semi-implicit Euler for one particle (unit mass) plus boundary handling.
/// Walls reflect; periodic boundaries wrap into [0, L).
inline void integrate_particle(Vec3& x, Vec3& v, const Vec3& force, const Domain& domain, double dt,
                               std::size_t index) {
  if (!is_finite(force)) {
    throw NumericError("non-finite force on particle " + std::to_string(index));
  }
  v += force * dt;
  x += v * dt;
  const double L = domain.side_length;
  for (int c = 0; c < 3; ++c) {
    double& xc = x[c];
    if (domain.periodic()) {
      if (xc < 0.0 || xc >= L) {
        xc -= L * std::floor(xc / L);
        if (xc >= L || xc < 0.0) xc = 0.0;
      }
    } else {
      if (xc < 0.0) {
        xc = -xc;
        v[c] = -v[c];
      } else if (xc > L) {
        xc = 2.0 * L - xc;
        v[c] = -v[c];
      }
      // Displacements longer than the box: pin to the box.
      xc = std::clamp(xc, 0.0, L);
    }
  }
  if (!is_finite(x) || !is_finite(v)) {
    throw NumericError("non-finite state on particle " + std::to_string(index));
  }
}

/// Move every particle by its accumulated force, then zero the forces.
inline void integrate(ParticleSystem& ps, const Domain& domain, double dt, unsigned threads = 1) {
  parallel_for(ps.size(), threads, [&](std::size_t i) {
    integrate_particle(ps.positions[i], ps.velocities[i], ps.forces[i], domain, dt, i);
    ps.forces[i] = {};
  });
}

}  // namespace orcs
