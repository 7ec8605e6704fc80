#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "orcs/distributions.hpp"

using namespace orcs;

TEST(Generate, LatticeEightFormsCube) {
  const Domain d(10.0, BoundaryKind::Wall);
  const ParticleSystem ps = generate_particles({Lattice{}, ConstRadius{1.0}, 1}, 8, d);
  ASSERT_EQ(ps.size(), 8u);
  std::set<double> xs, ys, zs;
  for (const auto& p : ps.positions) {
    xs.insert(p.x);
    ys.insert(p.y);
    zs.insert(p.z);
  }
  EXPECT_EQ(xs, (std::set<double>{2.5, 7.5}));
  EXPECT_EQ(ys, xs);
  EXPECT_EQ(zs, xs);
  // Every particle's nearest neighbor is one lattice spacing away.
  for (std::size_t i = 0; i < 8; ++i) {
    double best = 1e300;
    for (std::size_t j = 0; j < 8; ++j) {
      if (i != j) best = std::min(best, norm(ps.positions[i] - ps.positions[j]));
    }
    EXPECT_DOUBLE_EQ(best, 5.0);
  }
}

TEST(Generate, ConstRadiusIsUniform) {
  const ParticleSystem ps = generate_particles({Disordered{}, ConstRadius{1.0}, 3}, 1000, Domain{});
  EXPECT_TRUE(ps.uniform_radius);
  EXPECT_TRUE(std::all_of(ps.radii.begin(), ps.radii.end(), [](double r) { return r == 1.0; }));
}

TEST(Generate, LogNormalRadiiWithinClamp) {
  const ParticleSystem ps = generate_particles({Disordered{}, LogNormalRadius{}, 42}, 100000, Domain{});
  const auto [lo, hi] = std::minmax_element(ps.radii.begin(), ps.radii.end());
  EXPECT_GE(*lo, 1.0);
  EXPECT_LE(*hi, 330.0);
  EXPECT_FALSE(ps.uniform_radius);
}

TEST(Generate, AllPositionsInsideBox) {
  const Domain d(50.0, BoundaryKind::Periodic);
  for (ParticleDist pd : {ParticleDist{Lattice{}}, ParticleDist{Disordered{}}, ParticleDist{Cluster{}},
                          ParticleDist{Cluster{Vec3{0, 0, 0}, 20.0}}}) {
    const ParticleSystem ps = generate_particles({pd, UniformRadius{1, 3}, 9}, 2000, d);
    for (const auto& p : ps.positions) {
      ASSERT_TRUE(d.inside(p));
      ASSERT_LT(p.x, 50.0);
    }
  }
}

TEST(Generate, SeedDeterminesState) {
  const DistributionSpec s{Cluster{}, LogNormalRadius{}, 11};
  const ParticleSystem a = generate_particles(s, 500, Domain{});
  const ParticleSystem b = generate_particles(s, 500, Domain{});
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_EQ(a.radii, b.radii);
  const ParticleSystem c = generate_particles({Cluster{}, LogNormalRadius{}, 12}, 500, Domain{});
  EXPECT_NE(a.positions, c.positions);
}

TEST(Generate, InvalidSpecsRejected) {
  EXPECT_THROW(generate_particles({Disordered{}, UniformRadius{5, 1}, 1}, 10, Domain{}), ConfigError);
  EXPECT_THROW(generate_particles({Disordered{}, ConstRadius{0}, 1}, 10, Domain{}), ConfigError);
  EXPECT_THROW(generate_particles({Disordered{}, ConstRadius{1}, 1}, 0, Domain{}), ConfigError);
  EXPECT_THROW(generate_particles({Disordered{}, ConstRadius{1}, 1}, 100, Domain{}, 10), CapacityError);
  EXPECT_THROW(generate_particles({Cluster{Vec3{-1e6, 0, 0}, 1.0}, ConstRadius{1}, 1}, 1, Domain{}), ConfigError);
}

TEST(Generate, VelocitiesFromOwnStream) {
  ParticleSystem ps = generate_particles({Disordered{}, ConstRadius{1}, 4}, 20000, Domain{});
  const auto before = ps.positions;
  assign_velocities(ps, 2.0, 4);
  EXPECT_EQ(ps.positions, before);
  double sum2 = 0.0;
  for (const auto& v : ps.velocities) sum2 += norm2(v);
  EXPECT_NEAR(std::sqrt(sum2 / (3.0 * 20000)), 2.0, 0.05);
}

TEST(Labels, FileNameTokens) {
  EXPECT_EQ(label(ParticleDist{Cluster{}}), "cluster");
  EXPECT_EQ(label(RadiusDist{ConstRadius{1}}), "const1");
  EXPECT_EQ(label(RadiusDist{UniformRadius{1, 160}}), "uniform1_160");
  EXPECT_EQ(label(RadiusDist{LogNormalRadius{}}), "lognormal");
}
