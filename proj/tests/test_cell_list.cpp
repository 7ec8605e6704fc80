#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "orcs/cell_list.hpp"
#include "orcs/distributions.hpp"

using namespace orcs;

TEST(Brute, StrictBoundary) {
  const Domain d(10.0, BoundaryKind::Wall);
  EXPECT_EQ(brute_force_neighbors(ParticleSystem({{1, 1, 1}, {1.5, 1, 1}}, {1, 1}), d),
            (PairSet{{0, 1}}));
  EXPECT_TRUE(brute_force_neighbors(ParticleSystem({{1, 1, 1}, {2, 1, 1}}, {1, 1}), d).empty());
  EXPECT_TRUE(brute_force_neighbors(ParticleSystem({{1, 1, 1}, {3, 1, 1}}, {0.5, 2}), d).empty());
  EXPECT_EQ(brute_force_neighbors(ParticleSystem({{1, 1, 1}, {2.9, 1, 1}}, {0.5, 2}), d).size(), 1u);
}

TEST(Brute, RefusesLargeInput) {
  const ParticleSystem ps = generate_particles({Disordered{}, ConstRadius{1}, 1}, 6000, Domain{});
  EXPECT_THROW(brute_force_neighbors(ps, Domain{}), CapacityError);
}

TEST(Grid, DimsFollowLargestRadius) {
  const Domain d(1000.0, BoundaryKind::Wall);
  const ParticleSystem big({{1, 1, 1}, {500, 500, 500}}, {160, 1});
  EXPECT_EQ(build_grid(big, d).dims[0], 6u);
  const ParticleSystem unit({{1, 1, 1}, {500, 500, 500}}, {1, 1});
  const CellGrid g = build_grid(unit, d);
  EXPECT_EQ(g.dims[0], 1000u);
  EXPECT_EQ(g.occupied_cells(), 2u);
  const ParticleSystem one({{3, 3, 3}}, {1});
  EXPECT_EQ(build_grid(one, d).occupied_cells(), 1u);
  EXPECT_EQ(build_grid(ParticleSystem({{3, 3, 3}}, {900}), d).dims[0], 1u);
}

TEST(Grid, BucketsAreZOrderedAndComplete) {
  const Domain d(100.0, BoundaryKind::Wall);
  const ParticleSystem ps = generate_particles({Disordered{}, ConstRadius{3}, 2}, 5000, d);
  const CellGrid g = build_grid(ps, d);
  EXPECT_TRUE(std::is_sorted(g.keys.begin(), g.keys.end()));
  std::vector<std::uint32_t> all(g.order);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) ASSERT_EQ(all[i], i);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto c = g.coords_of(ps.positions[i]);
    const auto cell = g.cell(c[0], c[1], c[2]);
    ASSERT_NE(std::find(cell.begin(), cell.end(), i), cell.end());
  }
}

TEST(CellPairs, MatchBruteForceBothBoundaries) {
  for (auto bc : {BoundaryKind::Wall, BoundaryKind::Periodic}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      // Includes tiny grids (2-3 cells per axis) where periodic stencils alias.
      const double hi = seed % 3 == 0 ? 45.0 : 8.0;
      const Domain d(100.0, bc);
      const ParticleDist pd = seed % 2 ? ParticleDist{Disordered{}} : ParticleDist{Cluster{std::nullopt, 12}};
      const ParticleSystem ps = generate_particles({pd, UniformRadius{0.5, hi}, seed}, 800, d);
      PairSet expected = brute_force_neighbors(ps, d);
      normalize(expected);
      ASSERT_EQ(cell_pair_set(build_grid(ps, d), ps, d), expected) << seed;
    }
  }
}

TEST(CellForces, MatchBrutePipeline) {
  for (auto bc : {BoundaryKind::Wall, BoundaryKind::Periodic}) {
    const Domain d(30.0, bc);
    LjParams lj;
    lj.force_form = ForceForm::Standard;
    lj.dt = 1e-3;
    ParticleSystem a = generate_particles({Disordered{}, UniformRadius{1, 3}, 4}, 2000, d);
    assign_velocities(a, 1.0, 4);
    ParticleSystem b = a;
    for (int s = 0; s < 5; ++s) {
      const std::uint64_t pairs = brute_force_forces(a, d, lj);
      integrate(a, d, lj.dt);
      const CellGrid g = build_grid(b, d);
      EXPECT_EQ(cell_forces(g, b, d, lj), pairs);
      integrate(b, d, lj.dt);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int c = 0; c < 3; ++c) ASSERT_NEAR(a.positions[i][c], b.positions[i][c], 1e-9);
    }
  }
}

TEST(CellForces, LatticeMatchesForcesMode) {
  const Domain d(10 * 0.95, BoundaryKind::Periodic);
  ParticleSystem base = generate_particles({Lattice{}, ConstRadius{2.5}, 1}, 1000, d);
  assign_velocities(base, 1.0, 1);
  LjParams lj;
  lj.dt = 1e-3;
  ParticleSystem c = base, f = base;
  for (int s = 0; s < 10; ++s) {
    c = step_cell(build_grid(c, d), c, d, lj);
    f = step_forces(Bvh::build(f, d), f, d, lj);
  }
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (int k = 0; k < 3; ++k) ASSERT_NEAR(c.positions[i][k], f.positions[i][k], 1e-6);
  }
}

TEST(CellForces, SingleParticleDrifts) {
  const Domain d(10.0, BoundaryKind::Periodic);
  ParticleSystem ps({{9.5, 1, 1}}, {1});
  ps.velocities[0] = {1, 0, 0};
  LjParams lj;
  lj.dt = 1.0;
  const ParticleSystem out = step_cell(build_grid(ps, d), ps, d, lj);
  EXPECT_DOUBLE_EQ(out.positions[0].x, 0.5);
  EXPECT_EQ(out.forces[0], Vec3{});
}
