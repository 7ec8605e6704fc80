#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "orcs/bvh.hpp"
#include "orcs/domain.hpp"
#include "orcs/error.hpp"
#include "orcs/lj.hpp"
#include "orcs/parallel.hpp"
#include "orcs/particles.hpp"

namespace orcs {

enum class QueryMode { NeighborList, Perse, Forces };

inline std::string_view to_string(QueryMode mode) noexcept {
  switch (mode) {
    case QueryMode::NeighborList:
      return "list";
    case QueryMode::Perse:
      return "perse";
    case QueryMode::Forces:
      return "forces";
  }
  return "?";
}

/// Translations at which a particle near periodic walls re-issues its query.
/// At most 2^3 - 1 offsets; the zero offset is never included.
struct GhostQuerySet {
  std::array<Vec3, 7> offsets{};
  std::size_t count = 0;

  const Vec3* begin() const noexcept { return offsets.data(); }
  const Vec3* end() const noexcept { return offsets.data() + count; }
  std::size_t size() const noexcept { return count; }
  bool empty() const noexcept { return count == 0; }
};

/// Every axis whose nearer wall is closer than trigger_radius contributes a
/// shift of +-L pointing across that wall; the result is one offset per
/// non-empty subset of the contributing axes.
inline GhostQuerySet ghost_offsets(const Vec3& p, double trigger_radius, const Domain& domain) noexcept {
  GhostQuerySet set;
  if (!domain.periodic()) return set;
  const double L = domain.side_length;
  std::array<double, 3> shift{};
  for (int c = 0; c < 3; ++c) {
    if (p[c] < trigger_radius && p[c] <= L - p[c]) {
      shift[c] = L;
    } else if (L - p[c] < trigger_radius) {
      shift[c] = -L;
    }
  }
  for (unsigned mask = 1; mask < 8; ++mask) {
    Vec3 o;
    bool valid = true;
    for (int c = 0; c < 3 && valid; ++c) {
      if (mask & (1u << c)) {
        if (shift[c] == 0.0) valid = false;
        o[c] = shift[c];
      }
    }
    if (valid) set.offsets[set.count++] = o;
  }
  return set;
}

using GhostOffsetFn = GhostQuerySet (*)(const Vec3&, double, const Domain&);

struct EngineOptions {
  unsigned threads = 1;
  /// Per-worker force buffers reduced in worker order instead of atomic adds.
  bool deterministic = true;
  GhostOffsetFn ghost = &ghost_offsets;
};

/// Per-pass counters.
struct PassStats {
  TraversalStats traversal;
  std::uint64_t interactions = 0;  // unordered pairs

  PassStats& operator+=(const PassStats& o) noexcept {
    traversal += o.traversal;
    interactions += o.interactions;
    return *this;
  }
};

/// The pair predicate shared by every engine and oracle: with d2 the squared
/// min-image distance, j is detected from i iff d2 < r_j^2, and the pair
/// interacts iff either side detects the other (d2 < max(r_i, r_j)^2).
inline bool detects(double d2, double r_target) noexcept { return d2 < r_target * r_target; }
inline bool interacting(double d2, double r_i, double r_j) noexcept { return detects(d2, std::max(r_i, r_j)); }

/// Exactly one side of a detected pair computes its force: the detecting
/// particle with the strictly smaller radius, or the lower index on a tie.
inline bool owns_pair(std::size_t i, std::size_t j, double r_i, double r_j) noexcept {
  // Bitwise: evaluated in full, so callers can fold it into a single branch.
  return (r_i < r_j) | ((r_i == r_j) & (i < j));
}

namespace detail {

// Tolerance that absorbs rounding between the geometric test at a translated
// query point and the canonical min-image distance.
inline double geometric_tolerance(const Domain& domain) noexcept { return 1e-9 * domain.side_length; }

inline void check_periodic_radius(const ParticleSystem& ps, const Domain& domain) {
  if (domain.periodic() && !(ps.max_radius + geometric_tolerance(domain) < 0.5 * domain.side_length)) {
    throw ModeError("periodic boundaries need every search radius below half the box length");
  }
}

/// Runs particle i's query at p_i and, under periodic boundaries, at each
/// ghost position. on_hit(j, delta, d2) fires once per j detected from i
/// for which accept(j) holds, with delta the min-image displacement
/// p_j - p_i.
template <class Accept, class OnHit>
void detect_from_if(const Bvh& bvh, const ParticleSystem& ps, const Domain& domain, std::size_t i,
                    GhostOffsetFn ghost, TraversalStats& stats, Accept&& accept, OnHit&& on_hit) {
  const Vec3& p = ps.positions[i];
  const double tol = geometric_tolerance(domain);
  const bool periodic = domain.periodic();
  std::uint64_t tests = 0;
  std::uint64_t hits = 0;
  auto run = [&](const Vec3& q) {
    bvh.for_each_candidate(q, tol, stats, [&](std::uint32_t j) {
      if (j == i) return;
      ++tests;
      const double rj = ps.radii[j];
      // Geometric gate: only the query copy that actually sits next to the
      // tree's image of p_j may report it, so a pair is never seen twice
      // through two images. Without images the detection test implies it.
      if (periodic) {
        const double reach = rj + tol;
        if (!(norm2(q - bvh.stored(ps, j)) < reach * reach)) return;
      }
      const Vec3 delta = min_image_delta(p, ps.positions[j], domain);
      const double d2 = norm2(delta);
      const bool hit = detects(d2, rj);
      hits += hit;
      if (!(hit & accept(static_cast<std::size_t>(j)))) return;
      on_hit(static_cast<std::size_t>(j), delta, d2);
    });
  };
  run(p);
  if (periodic) {
    // Stored images may sit outside the box, so widen the trigger to match.
    for (const Vec3& o : ghost(p, ps.max_radius + tol + bvh.overhang(), domain)) run(p + o);
  }
  stats.sphere_tests += tests;
  stats.hits += hits;
}

template <class OnHit>
void detect_from(const Bvh& bvh, const ParticleSystem& ps, const Domain& domain, std::size_t i,
                 GhostOffsetFn ghost, TraversalStats& stats, OnHit&& on_hit) {
  detect_from_if(bvh, ps, domain, i, ghost, stats, [](std::size_t) { return true; }, on_hit);
}

}  // namespace detail

struct NoPairObserver {
  void operator()(std::size_t, std::size_t) const noexcept {}
};

/// Forces mode, query half: each detected pair is evaluated once by its owner,
/// which adds +F to itself and -F to the partner. Forces are accumulated into
/// ps.forces (assumed zero on entry). observer(owner, partner) is called for
/// every processed pair, concurrently when threads > 1.
template <class PairObserver = NoPairObserver>
PassStats accumulate_forces(const Bvh& bvh, ParticleSystem& ps, const Domain& domain, const LjParams& lj,
                            const EngineOptions& opts = {}, PairObserver&& observer = {}) {
  detail::check_periodic_radius(ps, domain);
  const std::size_t n = ps.size();
  const unsigned blocks = block_count(n, opts.threads);
  std::vector<PassStats> block_stats(blocks);
  const bool buffered = opts.deterministic && blocks > 1;
  std::vector<std::vector<Vec3>> buffers(buffered ? blocks : 0);

  parallel_blocks(n, opts.threads, [&](unsigned w, std::size_t begin, std::size_t end) {
    PassStats& st = block_stats[w];
    std::vector<Vec3>* buffer = nullptr;
    if (buffered) {
      buffers[w].assign(n, Vec3{});
      buffer = &buffers[w];
    }
    auto add = [&](std::size_t k, const Vec3& f) {
      if (buffer) {
        (*buffer)[k] += f;
      } else if (blocks == 1) {
        ps.forces[k] += f;
      } else {
        for (int c = 0; c < 3; ++c) std::atomic_ref<double>(ps.forces[k][c]).fetch_add(f[c], std::memory_order_relaxed);
      }
    };
    for (std::size_t i = begin; i < end; ++i) {
      const double ri = ps.radii[i];
      const auto owned = [&](std::size_t j) { return owns_pair(i, j, ri, ps.radii[j]); };
      detail::detect_from_if(bvh, ps, domain, i, opts.ghost, st.traversal, owned, [&](std::size_t j, const Vec3& delta, double) {
        const double rj = ps.radii[j];
        const Vec3 f = pair_force_from_delta(delta, i, j, std::max(ri, rj), lj);
        add(i, f);
        add(j, -f);
        ++st.interactions;
        observer(i, j);
      });
    }
  });

  if (buffered) {
    parallel_for(n, opts.threads, [&](std::size_t k) {
      Vec3 sum = ps.forces[k];
      for (const auto& b : buffers) sum += b[k];
      ps.forces[k] = sum;
    });
  }
  PassStats total;
  for (const auto& s : block_stats) total += s;
  return total;
}

/// Forces mode step: accumulate, then a separate integration pass.
inline ParticleSystem step_forces(const Bvh& bvh, ParticleSystem ps, const Domain& domain, const LjParams& lj,
                                  const EngineOptions& opts = {}, PassStats* stats = nullptr) {
  ps.clear_forces();
  const PassStats st = accumulate_forces(bvh, ps, domain, lj, opts);
  integrate(ps, domain, lj.dt, opts.threads);
  if (stats) *stats = st;
  return ps;
}

/// Perse mode: every particle sums its own force from its hits and moves
/// itself in the same pass. Reads come from `in`, writes go to `out`, so all
/// particles see the pre-step state. Requires one common radius.
inline PassStats perse_pass(const Bvh& bvh, const ParticleSystem& in, ParticleSystem& out, const Domain& domain,
                            const LjParams& lj, const EngineOptions& opts = {}) {
  if (!in.uniform_radius) throw ModeError("perse mode requires a uniform search radius");
  detail::check_periodic_radius(in, domain);
  const std::size_t n = in.size();
  if (out.size() != n) out = in;
  const unsigned blocks = block_count(n, opts.threads);
  std::vector<PassStats> block_stats(blocks);
  parallel_blocks(n, opts.threads, [&](unsigned w, std::size_t begin, std::size_t end) {
    PassStats& st = block_stats[w];
    for (std::size_t i = begin; i < end; ++i) {
      const double ri = in.radii[i];
      Vec3 force;
      std::uint64_t hits = 0;
      detail::detect_from(bvh, in, domain, i, opts.ghost, st.traversal, [&](std::size_t j, const Vec3& delta, double) {
        force += pair_force_from_delta(delta, i, j, std::max(ri, in.radii[j]), lj);
        ++hits;
      });
      st.interactions += hits;
      Vec3 x = in.positions[i];
      Vec3 v = in.velocities[i];
      integrate_particle(x, v, force, domain, lj.dt, i);
      out.positions[i] = x;
      out.velocities[i] = v;
      out.forces[i] = {};
    }
  });
  PassStats total;
  for (const auto& s : block_stats) total += s;
  total.interactions /= 2;  // every pair was seen from both ends
  return total;
}

inline ParticleSystem step_perse(const Bvh& bvh, const ParticleSystem& ps, const Domain& domain, const LjParams& lj,
                                 const EngineOptions& opts = {}, PassStats* stats = nullptr) {
  ParticleSystem out = ps;
  const PassStats st = perse_pass(bvh, ps, out, domain, lj, opts);
  if (stats) *stats = st;
  return out;
}

/// Fixed-capacity neighbor rows, n * k_max slots.
struct NeighborList {
  std::size_t k_max = 0;
  std::vector<std::uint32_t> counts;
  std::vector<std::uint32_t> entries;

  std::span<const std::uint32_t> row(std::size_t i) const noexcept {
    return {entries.data() + i * k_max, counts[i]};
  }
  std::size_t memory_bytes() const noexcept { return entries.size() * sizeof(std::uint32_t); }
};

/// Neighbor-list mode, query half: row i receives every j interacting with i.
/// Pairs detected from one side only are mirrored into the other row.
/// Throws NeighborListOverflow naming a row that needs more than k_max (the
/// lowest such index when run on one thread). The pass stops as soon as a row
/// overflows; the reported requirement is that row's exact neighbor count.
inline PassStats build_neighbor_list(const Bvh& bvh, const ParticleSystem& ps, const Domain& domain, std::size_t k_max,
                                     NeighborList& list, const EngineOptions& opts = {}) {
  detail::check_periodic_radius(ps, domain);
  if (k_max == 0) throw ConfigError("kmax", "must be positive");
  const std::size_t n = ps.size();
  list.k_max = k_max;
  list.counts.assign(n, 0);
  list.entries.resize(n * k_max);

  const unsigned blocks = block_count(n, opts.threads);
  std::vector<PassStats> block_stats(blocks);
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> mirrored(blocks);
  std::atomic<bool> overflowed{false};
  std::vector<std::size_t> first_overflow(blocks, n);

  parallel_blocks(n, opts.threads, [&](unsigned w, std::size_t begin, std::size_t end) {
    PassStats& st = block_stats[w];
    for (std::size_t i = begin; i < end; ++i) {
      if (overflowed.load(std::memory_order_relaxed)) return;
      const double ri = ps.radii[i];
      std::uint32_t* row = list.entries.data() + i * k_max;
      std::uint32_t count = 0;
      detail::detect_from(bvh, ps, domain, i, opts.ghost, st.traversal, [&](std::size_t j, const Vec3&, double d2) {
        if (count < k_max) row[count] = static_cast<std::uint32_t>(j);
        ++count;
        // j cannot see i, so i has to be written into j's row.
        if (!detects(d2, ri)) mirrored[w].emplace_back(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i));
      });
      list.counts[i] = count;
      if (count > k_max) {
        first_overflow[w] = i;
        overflowed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  });

  if (overflowed.load()) {
    const std::size_t i = *std::min_element(first_overflow.begin(), first_overflow.end());
    std::size_t required = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && interacting(norm2(min_image_delta(ps.positions[i], ps.positions[j], domain)), ps.radii[i],
                                ps.radii[j])) {
        ++required;
      }
    }
    throw NeighborListOverflow(i, required, k_max);
  }

  for (const auto& block : mirrored) {
    for (const auto& [row_id, value] : block) {
      std::uint32_t& count = list.counts[row_id];
      if (count < k_max) list.entries[row_id * k_max + count] = value;
      ++count;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (list.counts[i] > k_max) throw NeighborListOverflow(i, list.counts[i], k_max);
  }

  PassStats total;
  for (const auto& s : block_stats) total += s;
  std::uint64_t directed = 0;
  for (auto c : list.counts) directed += c;
  total.interactions = directed / 2;
  return total;
}

inline NeighborList step_neighbor_list(const Bvh& bvh, const ParticleSystem& ps, const Domain& domain,
                                       std::size_t k_max, const EngineOptions& opts = {}) {
  NeighborList list;
  build_neighbor_list(bvh, ps, domain, k_max, list, opts);
  return list;
}

/// Force kernel over a filled neighbor list; every pair is evaluated from both rows.
inline void apply_neighbor_forces(const NeighborList& list, ParticleSystem& ps, const Domain& domain,
                                  const LjParams& lj, unsigned threads = 1) {
  parallel_for(ps.size(), threads, [&](std::size_t i) {
    Vec3 force;
    const double ri = ps.radii[i];
    for (std::uint32_t j : list.row(i)) {
      force += pair_force(i, j, ps, domain, std::max(ri, ps.radii[j]), lj);
    }
    ps.forces[i] = force;
  });
}

/// Unordered pairs (i < j), sorted.
using PairSet = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

/// Orients every pair as (low, high) and sorts lexicographically. Bucketing by
/// the low index first keeps this linear-ish for the multi-million pair sets
/// dense instances produce.
inline void normalize(PairSet& pairs) {
  std::size_t rows = 0;
  for (auto& [a, b] : pairs) {
    if (a > b) std::swap(a, b);
    rows = std::max<std::size_t>(rows, a + 1);
  }
  std::vector<std::size_t> start(rows + 1, 0);
  for (const auto& p : pairs) ++start[p.first + 1];
  for (std::size_t r = 0; r < rows; ++r) start[r + 1] += start[r];
  PairSet out(pairs.size());
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (const auto& p : pairs) out[fill[p.first]++] = p;
  for (std::size_t r = 0; r < rows; ++r) {
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(start[r]), out.begin() + static_cast<std::ptrdiff_t>(start[r + 1]));
  }
  pairs.swap(out);
}

/// Calls fn(owner, partner) for every pair the forces-mode owner rule
/// processes, in query order, without evaluating forces.
template <class Fn>
void for_each_owned_pair(const Bvh& bvh, const ParticleSystem& ps, const Domain& domain, const EngineOptions& opts,
                         Fn&& fn) {
  detail::check_periodic_radius(ps, domain);
  TraversalStats stats;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double ri = ps.radii[i];
    const auto owned = [&](std::size_t j) { return owns_pair(i, j, ri, ps.radii[j]); };
    detail::detect_from_if(bvh, ps, domain, i, opts.ghost, stats, owned,
                           [&](std::size_t j, const Vec3&, double) { fn(i, j); });
  }
}

/// Pairs the forces-mode owner rule processes, one entry per processed pair
/// (duplicates are kept so callers can detect double counting).
inline PairSet owned_pair_ledger(const Bvh& bvh, const ParticleSystem& ps, const Domain& domain,
                                 const EngineOptions& opts = {}) {
  PairSet pairs;
  for_each_owned_pair(bvh, ps, domain, opts, [&](std::size_t i, std::size_t j) {
    pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  });
  normalize(pairs);
  return pairs;
}

inline PairSet neighbor_list_pairs(const NeighborList& list) {
  PairSet pairs;
  for (std::size_t i = 0; i < list.counts.size(); ++i) {
    for (std::uint32_t j : list.row(i)) {
      if (i < j) pairs.emplace_back(static_cast<std::uint32_t>(i), j);
    }
  }
  normalize(pairs);
  return pairs;
}

}  // namespace orcs
