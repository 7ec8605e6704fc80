#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "orcs/domain.hpp"
#include "orcs/error.hpp"
#include "orcs/particles.hpp"
#include "orcs/random.hpp"

namespace orcs {

struct Lattice {};
struct Disordered {};
/// Normal(mu, sigma) per axis. An unset mu is drawn once per run from the box.
struct Cluster {
  std::optional<Vec3> mu;
  double sigma = 25.0;
};
using ParticleDist = std::variant<Lattice, Disordered, Cluster>;

struct ConstRadius {
  double r = 1.0;
};
struct UniformRadius {
  double lo = 1.0;
  double hi = 160.0;
};
/// exp(Normal(mu, sigma)) clamped into [lo, hi].
struct LogNormalRadius {
  double mu = 1.0;
  double sigma = 2.0;
  double lo = 1.0;
  double hi = 330.0;
};
using RadiusDist = std::variant<ConstRadius, UniformRadius, LogNormalRadius>;

struct DistributionSpec {
  ParticleDist particles = Disordered{};
  RadiusDist radii = ConstRadius{};
  std::uint64_t seed = 1;
};

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Sub-stream ids. Radii have their own stream so switching the radius
// distribution leaves positions untouched.
inline constexpr std::uint64_t kPositionStream = 1;
inline constexpr std::uint64_t kRadiusStream = 2;
inline constexpr std::uint64_t kVelocityStream = 3;

inline std::string format_number(double v) {
  std::string s = std::to_string(v);
  s.erase(s.find_last_not_of('0') + 1);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}
}  // namespace detail

inline std::string label(const ParticleDist& d) {
  return std::visit(detail::overloaded{[](const Lattice&) { return std::string("lattice"); },
                                       [](const Disordered&) { return std::string("disordered"); },
                                       [](const Cluster&) { return std::string("cluster"); }},
                    d);
}

inline std::string label(const RadiusDist& d) {
  using detail::format_number;
  return std::visit(
      detail::overloaded{
          [](const ConstRadius& c) { return "const" + format_number(c.r); },
          [](const UniformRadius& u) { return "uniform" + format_number(u.lo) + "_" + format_number(u.hi); },
          [](const LogNormalRadius&) { return std::string("lognormal"); }},
      d);
}

inline bool is_uniform(const RadiusDist& d) noexcept { return std::holds_alternative<ConstRadius>(d); }

inline void validate(const DistributionSpec& spec) {
  std::visit(detail::overloaded{
                 [](const Lattice&) {}, [](const Disordered&) {},
                 [](const Cluster& c) {
                   if (!(c.sigma > 0.0)) throw ConfigError("pdist", "cluster sigma must be positive");
                 }},
             spec.particles);
  std::visit(detail::overloaded{
                 [](const ConstRadius& c) {
                   if (!(c.r > 0.0)) throw ConfigError("radius-dist", "radius must be positive");
                 },
                 [](const UniformRadius& u) {
                   if (!(u.lo > 0.0) || !(u.lo <= u.hi))
                     throw ConfigError("radius-dist", "uniform radius needs 0 < lo <= hi");
                 },
                 [](const LogNormalRadius& l) {
                   if (!(l.lo > 0.0) || !(l.lo <= l.hi) || !(l.sigma >= 0.0))
                     throw ConfigError("radius-dist", "lognormal needs 0 < lo <= hi and sigma >= 0");
                 }},
             spec.radii);
}

/// Smallest m with m^3 >= n.
inline std::size_t lattice_side(std::size_t n) noexcept {
  auto m = static_cast<std::size_t>(std::cbrt(static_cast<double>(n)));
  while (m * m * m < n) ++m;
  while (m > 1 && (m - 1) * (m - 1) * (m - 1) >= n) --m;
  return m;
}

inline constexpr std::size_t kDefaultParticleLimit = 50'000'000;

/// Seeded initial state. Velocities are zero; see assign_velocities().
inline ParticleSystem generate_particles(const DistributionSpec& spec, std::size_t n, const Domain& domain,
                                         std::size_t particle_limit = kDefaultParticleLimit) {
  if (n == 0) throw ConfigError("n", "need at least one particle");
  if (n > particle_limit) {
    throw CapacityError("n = " + std::to_string(n) + " exceeds particle limit " + std::to_string(particle_limit));
  }
  validate(spec);

  const double L = domain.side_length;
  std::vector<Vec3> pos(n);
  SplitMix64 pgen = SplitMix64::substream(spec.seed, detail::kPositionStream);

  std::visit(detail::overloaded{
                 [&](const Lattice&) {
                   const std::size_t m = lattice_side(n);
                   const double h = L / static_cast<double>(m);
                   for (std::size_t i = 0; i < n; ++i) {
                     const std::size_t ix = i / (m * m);
                     const std::size_t iy = (i / m) % m;
                     const std::size_t iz = i % m;
                     pos[i] = {(static_cast<double>(ix) + 0.5) * h, (static_cast<double>(iy) + 0.5) * h,
                               (static_cast<double>(iz) + 0.5) * h};
                   }
                 },
                 [&](const Disordered&) {
                   for (auto& p : pos) {
                     p.x = uniform01(pgen) * L;
                     p.y = uniform01(pgen) * L;
                     p.z = uniform01(pgen) * L;
                   }
                 },
                 [&](const Cluster& c) {
                   Vec3 mu;
                   if (c.mu) {
                     mu = *c.mu;
                   } else {
                     mu = {uniform01(pgen) * L, uniform01(pgen) * L, uniform01(pgen) * L};
                   }
                   std::normal_distribution<double> normal(0.0, c.sigma);
                   constexpr int kMaxAttempts = 1'000'000;
                   for (auto& p : pos) {
                     int attempts = 0;
                     do {
                       if (++attempts > kMaxAttempts) {
                         throw ConfigError("pdist", "cluster center too far outside the box");
                       }
                       p = {mu.x + normal(pgen), mu.y + normal(pgen), mu.z + normal(pgen)};
                     } while (!(p.x >= 0.0 && p.x < L && p.y >= 0.0 && p.y < L && p.z >= 0.0 && p.z < L));
                   }
                 }},
             spec.particles);

  std::vector<double> radii(n);
  SplitMix64 rgen = SplitMix64::substream(spec.seed, detail::kRadiusStream);
  std::visit(detail::overloaded{
                 [&](const ConstRadius& c) { std::fill(radii.begin(), radii.end(), c.r); },
                 [&](const UniformRadius& u) {
                   for (auto& r : radii) r = u.lo + (u.hi - u.lo) * uniform01(rgen);
                 },
                 [&](const LogNormalRadius& l) {
                   std::lognormal_distribution<double> ln(l.mu, l.sigma);
                   for (auto& r : radii) r = std::clamp(ln(rgen), l.lo, l.hi);
                 }},
             spec.radii);

  return ParticleSystem(std::move(pos), std::move(radii));
}

/// Gaussian velocities with standard deviation `scale` per component, drawn
/// from their own sub-stream of `seed`.
inline void assign_velocities(ParticleSystem& ps, double scale, std::uint64_t seed) {
  if (scale == 0.0) return;
  SplitMix64 vgen = SplitMix64::substream(seed, detail::kVelocityStream);
  std::normal_distribution<double> normal(0.0, scale);
  for (auto& v : ps.velocities) v = {normal(vgen), normal(vgen), normal(vgen)};
}

}  // namespace orcs
