#include <gtest/gtest.h>

#include <sstream>

#include "orcs/validate.hpp"

using namespace orcs;

namespace {

// Mutant: forgets the combined multi-axis offset (edge/corner ghosts).
GhostQuerySet ghost_without_corners(const Vec3& p, double trigger, const Domain& d) noexcept {
  GhostQuerySet full = ghost_offsets(p, trigger, d);
  if (full.count > 1) --full.count;
  return full;
}

// Mutant: shifts point the wrong way across the wall.
GhostQuerySet ghost_flipped(const Vec3& p, double trigger, const Domain& d) noexcept {
  GhostQuerySet g = ghost_offsets(p, trigger, d);
  for (std::size_t k = 0; k < g.count; ++k) g.offsets[k] = -g.offsets[k];
  return g;
}

}  // namespace

TEST(Validate, FreshBuildPasses) {
  const ValidationReport r = run_validation();
  std::ostringstream os;
  print_report(os, r);
  EXPECT_TRUE(r.passed()) << os.str();
  EXPECT_EQ(r.properties.size(), 8u);
}

TEST(Validate, SameSeedSameReport) {
  ValidationOptions o;
  o.seed = 7;
  std::ostringstream a, b;
  print_report(a, run_validation(o));
  print_report(b, run_validation(o));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Validate, DetectsGhostMutations) {
  for (GhostOffsetFn mutant : {&ghost_without_corners, &ghost_flipped}) {
    ValidationOptions o;
    o.ghost = mutant;
    const ValidationReport r = run_validation(o);
    EXPECT_FALSE(r.passed());
    EXPECT_FALSE(r.find("periodic_straddling_pairs")->passed);
    EXPECT_TRUE(r.find("oracle_wall_uniform")->passed);
    EXPECT_TRUE(r.find("k_u_opt_consistency")->passed);
  }
}

TEST(Straddling, InstancesCoverFacesEdgesCorners) {
  const auto inst = straddling_pair_instances(100.0, 1.0, 5.0);
  ASSERT_EQ(inst.size(), 26u);
  int faces = 0, edges = 0, corners = 0;
  for (const auto& s : inst) {
    const int k = std::abs(s.direction[0]) + std::abs(s.direction[1]) + std::abs(s.direction[2]);
    faces += k == 1;
    edges += k == 2;
    corners += k == 3;
    const Vec3 direct = s.particles.positions[1] - s.particles.positions[0];
    const Vec3 image = min_image_delta(s.particles.positions[0], s.particles.positions[1],
                                       Domain(100.0, BoundaryKind::Periodic));
    EXPECT_GT(norm(direct), 5.0);
    EXPECT_LT(norm(image), 5.0);
  }
  EXPECT_EQ(faces, 6);
  EXPECT_EQ(edges, 12);
  EXPECT_EQ(corners, 8);
}
