#include <gtest/gtest.h>

#include "orcs/simulation.hpp"

using namespace orcs;

namespace {
SimConfig small(EngineKind engine, QueryMode mode = QueryMode::Forces) {
  SimConfig c;
  c.n = 1000;
  c.steps = 10;
  c.domain = Domain(10.0 * 0.95, BoundaryKind::Periodic);
  c.engine = engine;
  c.mode = mode;
  c.dist = {Lattice{}, ConstRadius{2.5}, 3};
  c.lj.dt = 1e-3;
  c.init_speed = 1.0;
  c.threads = 1;
  c.deterministic = true;
  return c;
}
}  // namespace

TEST(Simulation, EnginesReportSameInteractions) {
  Simulation bvh(small(EngineKind::Bvh));
  Simulation cell(small(EngineKind::Cell));
  Simulation brute(small(EngineKind::Brute));
  Simulation list(small(EngineKind::Bvh, QueryMode::NeighborList));
  Simulation perse(small(EngineKind::Bvh, QueryMode::Perse));
  for (int s = 0; s < 5; ++s) {
    const auto a = bvh.step();
    EXPECT_GT(a.interactions, 0u);
    EXPECT_EQ(cell.step().interactions, a.interactions);
    EXPECT_EQ(brute.step().interactions, a.interactions);
    EXPECT_EQ(list.step().interactions, a.interactions);
    EXPECT_EQ(perse.step().interactions, a.interactions);
  }
  for (std::size_t i = 0; i < 1000; ++i) {
    for (int c = 0; c < 3; ++c) {
      ASSERT_NEAR(bvh.particles().positions[i][c], perse.particles().positions[i][c], 1e-9);
      ASSERT_NEAR(bvh.particles().positions[i][c], list.particles().positions[i][c], 1e-9);
      ASSERT_NEAR(bvh.particles().positions[i][c], cell.particles().positions[i][c], 1e-9);
    }
  }
}

TEST(Simulation, PhaseTimesWithinWallTime) {
  for (auto e : {EngineKind::Bvh, EngineKind::Cell, EngineKind::Brute}) {
    Simulation sim(small(e));
    for (int s = 0; s < 5; ++s) {
      const StepRecord r = sim.step();
      EXPECT_GE(r.maintain_ms, 0.0);
      EXPECT_LE(r.maintain_ms + r.query_ms + r.integrate_ms, r.wall_ms + 1e-3);
    }
  }
}

TEST(Simulation, FirstStepRebuildsThenPolicy) {
  SimConfig c = small(EngineKind::Bvh);
  c.policy.spec = FixedKPolicy{3};
  Simulation sim(c);
  std::vector<bool> rebuilt;
  for (int s = 0; s < 7; ++s) rebuilt.push_back(sim.step().rebuilt);
  EXPECT_EQ(rebuilt, (std::vector<bool>{true, false, false, true, false, false, true}));
  EXPECT_EQ(sim.bvh().epoch(), 0u);
}

TEST(Simulation, ValidationRejectsBadCombinations) {
  SimConfig c = small(EngineKind::Bvh, QueryMode::Perse);
  c.dist.radii = UniformRadius{1, 2};
  EXPECT_THROW(Simulation{c}, ConfigError);
  c = small(EngineKind::Brute);
  c.n = 100000;
  EXPECT_THROW(Simulation{c}, ConfigError);
  c = small(EngineKind::Bvh);
  c.dist.radii = ConstRadius{5.0};  // >= L/2 under periodic boundaries
  EXPECT_THROW(Simulation{c}, ConfigError);
}

TEST(Simulation, AcceptsExplicitState) {
  SimConfig c = small(EngineKind::Bvh);
  ParticleSystem ps({{1, 1, 1}, {1.5, 1, 1}}, {1.0, 2.0});
  Simulation sim(c, ps);
  EXPECT_EQ(sim.config().n, 2u);
  EXPECT_EQ(sim.step().interactions, 1u);
}

TEST(Simulation, NeighborListMemoryCharged) {
  SimConfig c = small(EngineKind::Bvh, QueryMode::NeighborList);
  c.k_max = 64;
  Simulation sim(c);
  EXPECT_GE(sim.memory_estimate(), c.n * c.k_max * sizeof(std::uint32_t));
}
