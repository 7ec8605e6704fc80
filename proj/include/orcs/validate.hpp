#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "orcs/bvh.hpp"
#include "orcs/cell_list.hpp"
#include "orcs/distributions.hpp"
#include "orcs/engine.hpp"
#include "orcs/policy.hpp"
#include "orcs/random.hpp"

namespace orcs {

struct ValidationOptions {
  std::uint64_t seed = 1;
  /// Randomized instances per (boundary, radius regime) property.
  std::size_t instances = 6;
  std::size_t n = 400;
  std::size_t ku_cases = 300;
  /// Ghost offset generator used by the BVH engine; swapped in mutation tests.
  GhostOffsetFn ghost = &ghost_offsets;
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<PropertyResult> properties;

  bool passed() const noexcept {
    return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed; });
  }
  const PropertyResult* find(const std::string& name) const noexcept {
    for (const auto& p : properties) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
};

inline void print_report(std::ostream& os, const ValidationReport& report) {
  for (const auto& p : report.properties) {
    os << (p.passed ? "PASS " : "FAIL ") << p.name;
    if (!p.detail.empty()) os << "  (" << p.detail << ")";
    os << '\n';
  }
}

/// Two particles a, b of equal radius sitting on opposite sides of the
/// periodic wall(s) named by `direction` (each component -1, 0 or +1).
struct StraddlingInstance {
  std::array<int, 3> direction{};
  ParticleSystem particles;
};

/// One instance for each of the 6 faces, 12 edges and 8 corners of the box.
/// a sits at distance `delta` from the walls selected by the direction and b
/// is a + 2*delta*direction wrapped back into the box, so the direct distance
/// exceeds `radius` while the min-image distance (2*delta*|direction|) does not.
inline std::vector<StraddlingInstance> straddling_pair_instances(double side_length, double delta, double radius) {
  std::vector<StraddlingInstance> out;
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const std::array<int, 3> s{dx, dy, dz};
        Vec3 a;
        Vec3 b;
        for (int c = 0; c < 3; ++c) {
          a[c] = s[c] > 0 ? side_length - delta : (s[c] < 0 ? delta : 0.5 * side_length);
          b[c] = a[c] + 2.0 * delta * s[c];
          if (b[c] >= side_length) b[c] -= side_length;
          if (b[c] < 0.0) b[c] += side_length;
        }
        out.push_back({s, ParticleSystem({a, b}, {radius, radius})});
      }
    }
  }
  return out;
}

namespace detail {

inline PairSet bvh_owned_pairs(const ParticleSystem& ps, const Domain& domain, GhostOffsetFn ghost) {
  const Bvh bvh = Bvh::build(ps, domain);
  EngineOptions opts;
  opts.ghost = ghost;
  return owned_pair_ledger(bvh, ps, domain, opts);
}

inline std::string pair_diff(const PairSet& expected, const PairSet& got) {
  std::size_t missing = 0;
  std::size_t extra = 0;
  for (const auto& p : expected) missing += std::binary_search(got.begin(), got.end(), p) ? 0 : 1;
  for (const auto& p : got) extra += std::binary_search(expected.begin(), expected.end(), p) ? 0 : 1;
  return "expected " + std::to_string(expected.size()) + ", got " + std::to_string(got.size()) + ", missing " +
         std::to_string(missing) + ", extra " + std::to_string(extra);
}

inline PropertyResult oracle_property(const ValidationOptions& o, BoundaryKind bc, bool variable) {
  PropertyResult res;
  res.name = std::string("oracle_") + std::string(to_string(bc)) + (variable ? "_variable" : "_uniform");
  const Domain domain(100.0, bc);
  std::uint64_t total_pairs = 0;
  for (std::size_t k = 0; k < o.instances; ++k) {
    DistributionSpec spec;
    spec.seed = SplitMix64::mix(o.seed * 7919 + 100 + k + (variable ? 1000 : 0) + (bc == BoundaryKind::Periodic ? 2000 : 0));
    spec.particles = (k % 2 == 0) ? ParticleDist{Disordered{}} : ParticleDist{Cluster{std::nullopt, 15.0}};
    spec.radii = variable ? RadiusDist{UniformRadius{0.5, 12.0}} : RadiusDist{ConstRadius{4.0}};
    const ParticleSystem ps = generate_particles(spec, o.n, domain);

    PairSet brute = brute_force_neighbors(ps, domain);
    normalize(brute);
    const PairSet bvh = bvh_owned_pairs(ps, domain, o.ghost);
    const PairSet cell = cell_pair_set(build_grid(ps, domain), ps, domain);

    const Bvh tree = Bvh::build(ps, domain);
    EngineOptions opts;
    opts.ghost = o.ghost;
    NeighborList list;
    build_neighbor_list(tree, ps, domain, o.n, list, opts);
    const PairSet listed = neighbor_list_pairs(list);

    total_pairs += brute.size();
    if (bvh != brute) {
      res.detail = "instance " + std::to_string(k) + " bvh: " + pair_diff(brute, bvh);
      return res;
    }
    if (cell != brute) {
      res.detail = "instance " + std::to_string(k) + " cell: " + pair_diff(brute, cell);
      return res;
    }
    if (listed != brute) {
      res.detail = "instance " + std::to_string(k) + " list: " + pair_diff(brute, listed);
      return res;
    }
  }
  res.passed = true;
  res.detail = std::to_string(o.instances) + " instances, " + std::to_string(total_pairs) + " pairs";
  return res;
}

inline PropertyResult straddling_property(const ValidationOptions& o) {
  PropertyResult res;
  res.name = "periodic_straddling_pairs";
  const double L = 100.0;
  std::size_t detected_periodic = 0;
  std::size_t detected_wall = 0;
  const auto instances = straddling_pair_instances(L, 1.0, 5.0);
  for (const auto& inst : instances) {
    detected_periodic += bvh_owned_pairs(inst.particles, Domain(L, BoundaryKind::Periodic), o.ghost).size() == 1;
    detected_wall += !bvh_owned_pairs(inst.particles, Domain(L, BoundaryKind::Wall), o.ghost).empty();
  }
  res.passed = detected_periodic == instances.size() && detected_wall == 0;
  res.detail = std::to_string(detected_periodic) + "/" + std::to_string(instances.size()) +
               " detected periodic, " + std::to_string(detected_wall) + " under walls";
  return res;
}

/// Integer argmin of the total-cost model over [0, k_max] by exhaustive scan.
inline std::size_t k_u_argmin_scan(const CostModelParams& base, std::size_t k_max) {
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= k_max; ++k) {
    const double c = total_cost(base, k);
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  return best;
}

inline PropertyResult ku_property(const ValidationOptions& o) {
  PropertyResult res;
  res.name = "k_u_opt_consistency";
  SplitMix64 gen = SplitMix64::substream(o.seed, 77);
  std::size_t worst = 0;
  for (std::size_t c = 0; c < o.ku_cases; ++c) {
    const double t_r = 1e-3 + uniform01(gen) * (100.0 - 1e-3);
    const double t_u = uniform01(gen) * t_r;
    const double dq = std::pow(10.0, -3.0 + 4.0 * uniform01(gen));
    if (!(t_u > 0.0)) continue;
    const CostModelParams p{t_r, t_u, 1.0, dq, 10000};
    const std::size_t closed = k_u_opt(t_u, t_r, dq);
    const std::size_t scan = k_u_argmin_scan(p, 10000);
    const std::size_t diff = closed > scan ? closed - scan : scan - closed;
    worst = std::max(worst, diff);
  }
  res.passed = worst <= 1;
  res.detail = "max |closed - scan| = " + std::to_string(worst);
  return res;
}

inline PropertyResult mode_property(const ValidationOptions& o, BoundaryKind bc) {
  PropertyResult res;
  res.name = std::string("mode_equivalence_") + std::string(to_string(bc));
  // Spacing just under sigma so neighbors interact.
  const std::size_t n = 512;
  const Domain domain(8.0 * 0.95, bc);
  DistributionSpec spec{Lattice{}, ConstRadius{2.5}, o.seed};
  ParticleSystem base = generate_particles(spec, n, domain);
  assign_velocities(base, 0.5, o.seed);
  LjParams lj;
  lj.dt = 1e-4;
  EngineOptions opts;
  opts.ghost = o.ghost;

  ParticleSystem forces = base;
  ParticleSystem perse = base;
  ParticleSystem listed = base;
  for (int step = 0; step < 5; ++step) {
    forces = step_forces(Bvh::build(forces, domain), forces, domain, lj, opts);
    perse = step_perse(Bvh::build(perse, domain), perse, domain, lj, opts);
    const NeighborList list = step_neighbor_list(Bvh::build(listed, domain), listed, domain, n, opts);
    apply_neighbor_forces(list, listed, domain, lj);
    integrate(listed, domain, lj.dt);
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      dev = std::max({dev, std::abs(forces.positions[i][c] - perse.positions[i][c]),
                      std::abs(forces.positions[i][c] - listed.positions[i][c])});
    }
  }
  res.passed = dev <= 1e-6;
  res.detail = "max deviation " + std::to_string(dev);
  return res;
}

}  // namespace detail

/// Oracle-equivalence, ghost-query, cost-model and mode-equivalence checks.
inline ValidationReport run_validation(const ValidationOptions& o = {}) {
  ValidationReport r;
  for (BoundaryKind bc : {BoundaryKind::Wall, BoundaryKind::Periodic}) {
    for (bool variable : {false, true}) r.properties.push_back(detail::oracle_property(o, bc, variable));
  }
  r.properties.push_back(detail::straddling_property(o));
  r.properties.push_back(detail::ku_property(o));
  for (BoundaryKind bc : {BoundaryKind::Wall, BoundaryKind::Periodic}) {
    r.properties.push_back(detail::mode_property(o, bc));
  }
  return r;
}

}  // namespace orcs
