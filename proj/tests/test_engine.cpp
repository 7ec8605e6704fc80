#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "orcs/cell_list.hpp"
#include "orcs/distributions.hpp"
#include "orcs/engine.hpp"

using namespace orcs;

namespace {

std::set<std::tuple<double, double, double>> as_set(const GhostQuerySet& g) {
  std::set<std::tuple<double, double, double>> s;
  for (const Vec3& o : g) s.emplace(o.x, o.y, o.z);
  return s;
}

PairSet brute(const ParticleSystem& ps, const Domain& d) {
  PairSet p = brute_force_neighbors(ps, d);
  normalize(p);
  return p;
}

LjParams standard_lj(double dt = 1e-4) {
  LjParams lj;
  lj.force_form = ForceForm::Standard;
  lj.dt = dt;
  return lj;
}

}  // namespace

TEST(Ghost, InteriorHasNone) {
  const Domain d(100.0, BoundaryKind::Periodic);
  EXPECT_TRUE(ghost_offsets({50, 50, 50}, 5.0, d).empty());
  EXPECT_TRUE(ghost_offsets({5, 95, 50}, 5.0, d).empty());  // exactly at the trigger distance
  EXPECT_TRUE(ghost_offsets({1, 1, 1}, 5.0, Domain(100.0, BoundaryKind::Wall)).empty());
}

TEST(Ghost, TwoWallsGiveThreeOffsets) {
  const Domain d(100.0, BoundaryKind::Periodic);
  const auto g = ghost_offsets({1, 2, 50}, 5.0, d);
  EXPECT_EQ(as_set(g), (std::set<std::tuple<double, double, double>>{{100, 0, 0}, {0, 100, 0}, {100, 100, 0}}));
}

TEST(Ghost, CornerGivesSeven) {
  const Domain d(100.0, BoundaryKind::Periodic);
  const auto g = ghost_offsets({99, 1, 98}, 5.0, d);
  ASSERT_EQ(g.size(), 7u);
  for (const Vec3& o : g) {
    EXPECT_TRUE(o.x == -100 || o.x == 0);
    EXPECT_TRUE(o.y == 100 || o.y == 0);
    EXPECT_TRUE(o.z == -100 || o.z == 0);
  }
}

TEST(Predicate, StrictAndMax) {
  EXPECT_FALSE(detects(1.0, 1.0));
  EXPECT_TRUE(detects(0.99, 1.0));
  EXPECT_TRUE(interacting(4.0, 1.0, 2.5));
  EXPECT_FALSE(interacting(6.25, 1.0, 2.5));
  EXPECT_TRUE(owns_pair(5, 2, 1.0, 2.0));
  EXPECT_FALSE(owns_pair(2, 5, 2.0, 1.0));
  EXPECT_TRUE(owns_pair(2, 5, 1.0, 1.0));
  EXPECT_FALSE(owns_pair(5, 2, 1.0, 1.0));
}

TEST(Forces, OneSidedDetectionWritesBoth) {
  // r_2 < distance < r_1: only particle 1 (index 1 here, small radius) sees
  // particle 0 and it writes both contributions.
  const Domain d(20.0, BoundaryKind::Wall);
  ParticleSystem ps({{5, 5, 5}, {7, 5, 5}}, {3.0, 1.0});
  const Bvh bvh = Bvh::build(ps, d);
  std::vector<std::pair<std::size_t, std::size_t>> seen;
  const PassStats st = accumulate_forces(bvh, ps, d, standard_lj(), {}, [&](std::size_t i, std::size_t j) {
    seen.emplace_back(i, j);
  });
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0], (std::pair<std::size_t, std::size_t>{1, 0}));
  EXPECT_EQ(st.interactions, 1u);
  EXPECT_EQ(st.traversal.hits, 1u);
  const Vec3 expected = pair_force(1, 0, ps, d, 3.0, standard_lj());
  EXPECT_EQ(ps.forces[1], expected);
  EXPECT_EQ(ps.forces[0], -expected);
}

TEST(Forces, EqualRadiiOwnerIsLowerIndex) {
  const Domain d(20.0, BoundaryKind::Periodic);
  ParticleSystem ps({{19.5, 5, 5}, {0.7, 5.3, 5}}, {2.5, 2.5});
  const Bvh bvh = Bvh::build(ps, d);
  std::vector<std::pair<std::size_t, std::size_t>> seen;
  accumulate_forces(bvh, ps, d, standard_lj(), {}, [&](std::size_t i, std::size_t j) { seen.emplace_back(i, j); });
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].first, 0u);
  EXPECT_EQ(ps.forces[0] + ps.forces[1], Vec3{});
  EXPECT_NE(ps.forces[0], Vec3{});
}

TEST(Forces, EveryPairExactlyOnceVariableRadius) {
  for (auto bc : {BoundaryKind::Wall, BoundaryKind::Periodic}) {
    const Domain d(200.0, bc);
    ParticleSystem ps = generate_particles({Disordered{}, LogNormalRadius{1.0, 0.8, 1.0, 30.0}, 17}, 2000, d);
    const Bvh bvh = Bvh::build(ps, d);
    PairSet ledger;
    const PassStats st = accumulate_forces(bvh, ps, d, LjParams{}, {}, [&](std::size_t i, std::size_t j) {
      ledger.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    });
    normalize(ledger);
    const PairSet expected = brute(ps, d);
    EXPECT_EQ(std::adjacent_find(ledger.begin(), ledger.end()), ledger.end());
    EXPECT_EQ(ledger, expected);
    EXPECT_EQ(st.interactions, expected.size());
    EXPECT_GT(expected.size(), 500u);
  }
}

TEST(Forces, PeriodicRefitAcrossFacesMatchesBrute) {
  // Fast particles cross faces between refits; the drift eventually exceeds
  // the unwrapping budget, so both the unwrapped and the fallback tree are hit.
  const Domain d(60.0, BoundaryKind::Periodic);
  ParticleSystem ps = generate_particles({Disordered{}, UniformRadius{0.5, 4.0}, 23}, 1500, d);
  SplitMix64 g(99);
  std::vector<Vec3> v(ps.size());
  for (Vec3& vi : v) vi = {uniform01(g) - 0.5, uniform01(g) - 0.5, uniform01(g) - 0.5};
  Bvh bvh = Bvh::build(ps, d);
  double max_overhang = 0.0;
  bool fell_back = false;
  for (int step = 0; step < 80; ++step) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        double& x = ps.positions[i][c];
        x += 1.5 * v[i][c];
        x -= 60.0 * std::floor(x / 60.0);
      }
    }
    const double before = bvh.overhang();
    bvh.refit(ps);
    max_overhang = std::max(max_overhang, bvh.overhang());
    fell_back = fell_back || (before > 0.0 && bvh.overhang() == 0.0);
    const PairSet ledger = owned_pair_ledger(bvh, ps, d);
    ASSERT_EQ(std::adjacent_find(ledger.begin(), ledger.end()), ledger.end()) << "step " << step;
    ASSERT_EQ(ledger, brute(ps, d)) << "step " << step;
  }
  EXPECT_GT(max_overhang, 1.0);
  EXPECT_TRUE(fell_back);
}

TEST(Forces, ThreadedDeterministicIsReproducible) {
  const Domain d(60.0, BoundaryKind::Periodic);
  const ParticleSystem base = generate_particles({Cluster{std::nullopt, 10.0}, UniformRadius{1, 4}, 5}, 3000, d);
  const Bvh bvh = Bvh::build(base, d);
  EngineOptions det;
  det.threads = 4;
  det.deterministic = true;
  ParticleSystem a = base, b = base, serial = base, atomic = base;
  accumulate_forces(bvh, a, d, standard_lj(), det);
  accumulate_forces(bvh, b, d, standard_lj(), det);
  accumulate_forces(bvh, serial, d, standard_lj());
  EngineOptions relaxed = det;
  relaxed.deterministic = false;
  accumulate_forces(bvh, atomic, d, standard_lj(), relaxed);
  EXPECT_EQ(a.forces, b.forces);
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double scale = std::max(1.0, std::abs(serial.forces[i][c]));
      ASSERT_NEAR(a.forces[i][c], serial.forces[i][c], 1e-9 * scale);
      ASSERT_NEAR(atomic.forces[i][c], serial.forces[i][c], 1e-9 * scale);
    }
  }
}

TEST(Forces, PeriodicRadiusLimit) {
  const Domain d(10.0, BoundaryKind::Periodic);
  ParticleSystem ps({{1, 1, 1}, {2, 2, 2}}, {5.0, 1.0});
  const Bvh bvh = Bvh::build(ps, d);
  EXPECT_THROW(accumulate_forces(bvh, ps, d, LjParams{}), ModeError);
}

TEST(NeighborListMode, PairListsEachOther) {
  const Domain d(10.0, BoundaryKind::Wall);
  const ParticleSystem ps({{5, 5, 5}, {5.5, 5, 5}}, {1.0, 1.0});
  const NeighborList list = step_neighbor_list(Bvh::build(ps, d), ps, d, 8);
  ASSERT_EQ(list.row(0).size(), 1u);
  ASSERT_EQ(list.row(1).size(), 1u);
  EXPECT_EQ(list.row(0)[0], 1u);
  EXPECT_EQ(list.row(1)[0], 0u);
  EXPECT_EQ(list.memory_bytes(), 2 * 8 * sizeof(std::uint32_t));
}

TEST(NeighborListMode, MatchesBruteAdjacency) {
  for (auto bc : {BoundaryKind::Wall, BoundaryKind::Periodic}) {
    const Domain d(100.0, bc);
    const ParticleSystem ps = generate_particles({Disordered{}, UniformRadius{1, 10}, 23}, 1500, d);
    NeighborList list;
    build_neighbor_list(Bvh::build(ps, d), ps, d, 1500, list);
    // Full adjacency: row i holds every j interacting with i.
    std::vector<std::set<std::uint32_t>> adj(ps.size());
    for (const auto& [i, j] : brute(ps, d)) {
      adj[i].insert(j);
      adj[j].insert(i);
    }
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto row = list.row(i);
      ASSERT_EQ(std::set<std::uint32_t>(row.begin(), row.end()), adj[i]) << i;
      ASSERT_EQ(row.size(), adj[i].size());
    }
  }
}

TEST(NeighborListMode, OverflowNamesRow) {
  const Domain d(10.0, BoundaryKind::Wall);
  ParticleSystem ps(std::vector<Vec3>(6, Vec3{5, 5, 5}), std::vector<double>(6, 1.0));
  for (std::size_t i = 0; i < 6; ++i) ps.positions[i].x += 0.01 * static_cast<double>(i);
  NeighborList list;
  try {
    build_neighbor_list(Bvh::build(ps, d), ps, d, 3, list);
    FAIL() << "expected overflow";
  } catch (const NeighborListOverflow& e) {
    EXPECT_EQ(e.particle(), 0u);
    EXPECT_EQ(e.required(), 5u);
    EXPECT_EQ(e.capacity(), 3u);
  }
}

TEST(NeighborListMode, MirroredOverflowDetected) {
  // Particle 0 has a small radius and sees nobody; the three large ones all
  // reach it, so its row is filled only through mirroring.
  const Domain d(10.0, BoundaryKind::Wall);
  const ParticleSystem ps({{5, 5, 5}, {6, 5, 5}, {5, 6, 5}, {5, 5, 6}}, {0.1, 1.2, 1.2, 1.2});
  NeighborList list;
  EXPECT_THROW(build_neighbor_list(Bvh::build(ps, d), ps, d, 2, list), NeighborListOverflow);
}

TEST(Perse, IsolatedParticleDrifts) {
  const Domain d(100.0, BoundaryKind::Wall);
  ParticleSystem ps({{10, 10, 10}, {50, 50, 50}}, {1.0, 1.0});
  ps.velocities[0] = {1, 2, 3};
  const ParticleSystem out = step_perse(Bvh::build(ps, d), ps, d, standard_lj(0.5));
  EXPECT_EQ(out.positions[0], (Vec3{10.5, 11, 11.5}));
  EXPECT_EQ(out.positions[1], (Vec3{50, 50, 50}));
}

TEST(Perse, SymmetricPairMovesOppositely) {
  const Domain d(10.0, BoundaryKind::Wall);
  const ParticleSystem ps({{4.5, 5, 5}, {5.5, 5, 5}}, {2.5, 2.5});
  const ParticleSystem out = step_perse(Bvh::build(ps, d), ps, d, standard_lj(1e-3));
  const Vec3 d0 = out.positions[0] - ps.positions[0];
  const Vec3 d1 = out.positions[1] - ps.positions[1];
  EXPECT_EQ(d0.x, -d1.x);
  EXPECT_LT(d0.x, 0.0);  // at r = sigma the standard force repels
  EXPECT_EQ(d0.y, 0.0);
  EXPECT_EQ(d1.z, 0.0);
}

TEST(Perse, RejectsVariableRadius) {
  const Domain d(10.0, BoundaryKind::Wall);
  const ParticleSystem ps({{4.5, 5, 5}, {5.5, 5, 5}}, {1.0, 2.0});
  EXPECT_THROW(step_perse(Bvh::build(ps, d), ps, d, LjParams{}), ModeError);
}

TEST(Modes, AgreeOnDenseLattice) {
  for (auto bc : {BoundaryKind::Wall, BoundaryKind::Periodic}) {
    const Domain d(10 * 0.95, bc);
    ParticleSystem base = generate_particles({Lattice{}, ConstRadius{2.5}, 1}, 1000, d);
    assign_velocities(base, 1.0, 1);
    const LjParams lj = standard_lj(1e-3);
    ParticleSystem f = base, p = base, l = base;
    for (int s = 0; s < 20; ++s) {
      f = step_forces(Bvh::build(f, d), f, d, lj);
      p = step_perse(Bvh::build(p, d), p, d, lj);
      const NeighborList list = step_neighbor_list(Bvh::build(l, d), l, d, 256);
      apply_neighbor_forces(list, l, d, lj);
      integrate(l, d, lj.dt);
    }
    double dev = 0.0, moved = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        dev = std::max({dev, std::abs(f.positions[i][c] - p.positions[i][c]),
                        std::abs(f.positions[i][c] - l.positions[i][c])});
        moved = std::max(moved, std::abs(f.positions[i][c] - base.positions[i][c]));
      }
    }
    EXPECT_LE(dev, 1e-9);
    EXPECT_GT(moved, 1e-3);
  }
}
