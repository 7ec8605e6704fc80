#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "orcs/domain.hpp"
#include "orcs/engine.hpp"
#include "orcs/error.hpp"
#include "orcs/lj.hpp"
#include "orcs/parallel.hpp"
#include "orcs/particles.hpp"

namespace orcs {

inline constexpr std::size_t kDefaultOracleLimit = 5000;

/// All interacting pairs by exhaustive O(n^2) search, in (i < j)
/// lexicographic order. Test oracle only. The row scan runs over separate
/// coordinate arrays so it vectorizes; each step evaluates the same
/// expressions as min_image_delta, norm2 and interacting.
inline PairSet brute_force_neighbors(const ParticleSystem& ps, const Domain& domain,
                                     std::size_t limit = kDefaultOracleLimit) {
  const std::size_t n = ps.size();
  if (n > limit) {
    throw CapacityError("brute force oracle refuses n = " + std::to_string(n) + " (limit " + std::to_string(limit) + ")");
  }
  std::vector<double> x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = ps.positions[i].x;
    y[i] = ps.positions[i].y;
    z[i] = ps.positions[i].z;
  }
  const double* r = ps.radii.data();
  const double L = domain.side_length;
  const double half = 0.5 * L;
  auto fold = [&](double v) { return v - (v > half ? L : 0.0) + (v < -half ? L : 0.0); };
  std::vector<double> hit(n);  // lane-width flags keep the scan vectorizable
  PairSet pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i], yi = y[i], zi = z[i], ri = r[i];
    if (domain.periodic()) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = fold(x[j] - xi), dy = fold(y[j] - yi), dz = fold(z[j] - zi);
        const double rj = r[j];
        const double m = ri < rj ? rj : ri;  // std::max by value
        hit[j] = dx * dx + dy * dy + dz * dz < m * m ? 1.0 : 0.0;
      }
    } else {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = x[j] - xi, dy = y[j] - yi, dz = z[j] - zi;
        const double rj = r[j];
        const double m = ri < rj ? rj : ri;  // std::max by value
        hit[j] = dx * dx + dy * dy + dz * dz < m * m ? 1.0 : 0.0;
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (hit[j] != 0.0) pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
    }
  }
  return pairs;
}

/// Brute-force force accumulation into ps.forces; returns the pair count.
inline std::uint64_t brute_force_forces(ParticleSystem& ps, const Domain& domain, const LjParams& lj,
                                        std::size_t limit = kDefaultOracleLimit) {
  const std::size_t n = ps.size();
  if (n > limit) {
    throw CapacityError("brute force engine refuses n = " + std::to_string(n) + " (limit " + std::to_string(limit) + ")");
  }
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 delta = min_image_delta(ps.positions[i], ps.positions[j], domain);
      const double d2 = norm2(delta);
      if (!interacting(d2, ps.radii[i], ps.radii[j])) continue;
      const Vec3 f = pair_force_from_delta(delta, i, j, std::max(ps.radii[i], ps.radii[j]), lj);
      ps.forces[i] += f;
      ps.forces[j] -= f;
      ++pairs;
    }
  }
  return pairs;
}

namespace detail {
constexpr std::uint64_t expand_bits_21(std::uint64_t v) noexcept {
  v &= 0x1FFFFFu;
  v = (v | (v << 32)) & 0x001F00000000FFFFull;
  v = (v | (v << 16)) & 0x001F0000FF0000FFull;
  v = (v | (v << 8)) & 0x100F00F00F00F00Full;
  v = (v | (v << 4)) & 0x10C30C30C30C30C3ull;
  v = (v | (v << 2)) & 0x1249249249249249ull;
  return v;
}
}  // namespace detail

/// Uniform grid stored sparsely: only occupied cells are kept, ordered along
/// a Z-order curve over cell coordinates, each owning a contiguous run of
/// `order`.
struct CellGrid {
  static constexpr std::uint32_t kMaxDims = 1u << 21;

  double cell_size = 0.0;
  std::array<std::uint32_t, 3> dims{1, 1, 1};
  std::vector<std::uint64_t> keys;  // occupied cells, ascending
  std::vector<std::uint32_t> cell_start;
  std::vector<std::uint32_t> cell_count;
  std::vector<std::uint32_t> order;  // particle ids sorted by cell key

  static std::uint64_t key_of(std::uint32_t x, std::uint32_t y, std::uint32_t z) noexcept {
    return (detail::expand_bits_21(x) << 2) | (detail::expand_bits_21(y) << 1) | detail::expand_bits_21(z);
  }

  std::array<std::uint32_t, 3> coords_of(const Vec3& p) const noexcept {
    std::array<std::uint32_t, 3> c{};
    for (int a = 0; a < 3; ++a) {
      const double q = std::floor(p[a] / cell_size);
      c[a] = static_cast<std::uint32_t>(std::clamp(q, 0.0, static_cast<double>(dims[a] - 1)));
    }
    return c;
  }

  /// Particles of cell (x, y, z); empty when the cell is unoccupied.
  std::span<const std::uint32_t> cell(std::uint32_t x, std::uint32_t y, std::uint32_t z) const noexcept {
    const std::uint64_t key = key_of(x, y, z);
    const auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return {};
    const auto c = static_cast<std::size_t>(it - keys.begin());
    return {order.data() + cell_start[c], cell_count[c]};
  }

  std::size_t occupied_cells() const noexcept { return keys.size(); }

  std::size_t memory_bytes() const noexcept {
    return keys.capacity() * sizeof(std::uint64_t) +
           (cell_start.capacity() + cell_count.capacity() + order.capacity()) * sizeof(std::uint32_t);
  }
};

/// Cells are at least as wide as the largest search radius: the box is split
/// into floor(L / r_max) equal cells per axis (at least one), so the 27-cell
/// stencil covers every interacting pair, including across periodic walls.
inline CellGrid build_grid(const ParticleSystem& ps, const Domain& domain) {
  const double L = domain.side_length;
  if (ps.max_radius > L) throw ConfigError("radius-dist", "search radius larger than the box");
  CellGrid grid;
  double per_axis = std::floor(L / ps.max_radius);
  per_axis = std::clamp(per_axis, 1.0, static_cast<double>(CellGrid::kMaxDims));
  const auto d = static_cast<std::uint32_t>(per_axis);
  grid.dims = {d, d, d};
  grid.cell_size = L / static_cast<double>(d);

  const std::size_t n = ps.size();
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = grid.coords_of(ps.positions[i]);
    keyed[i] = {CellGrid::key_of(c[0], c[1], c[2]), static_cast<std::uint32_t>(i)};
  }
  std::sort(keyed.begin(), keyed.end());
  grid.order.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid.order[k] = keyed[k].second;
    if (k == 0 || keyed[k].first != keyed[k - 1].first) {
      grid.keys.push_back(keyed[k].first);
      grid.cell_start.push_back(static_cast<std::uint32_t>(k));
      grid.cell_count.push_back(0);
    }
    ++grid.cell_count.back();
  }
  return grid;
}

namespace detail {

// Neighbor cell coordinates along one axis: clipped at walls, wrapped (and
// de-duplicated for tiny grids) under periodic boundaries.
inline std::size_t stencil_axis(std::uint32_t c, std::uint32_t dim, bool periodic, std::array<std::uint32_t, 3>& out) {
  std::size_t k = 0;
  for (int off = -1; off <= 1; ++off) {
    std::int64_t v = static_cast<std::int64_t>(c) + off;
    if (periodic) {
      v = (v + dim) % dim;
    } else if (v < 0 || v >= static_cast<std::int64_t>(dim)) {
      continue;
    }
    const auto u = static_cast<std::uint32_t>(v);
    if (std::find(out.begin(), out.begin() + k, u) == out.begin() + k) out[k++] = u;
  }
  return k;
}

/// on_pair(j, delta, d2) for every j >= j_min, j != i, interacting with i.
template <class OnPair>
void scan_cells(const CellGrid& grid, const ParticleSystem& ps, const Domain& domain, std::size_t i, std::size_t j_min,
                OnPair&& on_pair) {
  const Vec3& p = ps.positions[i];
  const double ri = ps.radii[i];
  const auto c = grid.coords_of(p);
  std::array<std::array<std::uint32_t, 3>, 3> axis{};
  std::array<std::size_t, 3> len{};
  for (int a = 0; a < 3; ++a) len[a] = stencil_axis(c[a], grid.dims[a], domain.periodic(), axis[a]);
  for (std::size_t ix = 0; ix < len[0]; ++ix) {
    for (std::size_t iy = 0; iy < len[1]; ++iy) {
      for (std::size_t iz = 0; iz < len[2]; ++iz) {
        for (std::uint32_t j : grid.cell(axis[0][ix], axis[1][iy], axis[2][iz])) {
          if (j == i || j < j_min) continue;
          const Vec3 delta = min_image_delta(p, ps.positions[j], domain);
          const double d2 = norm2(delta);
          if (interacting(d2, ri, ps.radii[j])) on_pair(static_cast<std::size_t>(j), delta, d2);
        }
      }
    }
  }
}

}  // namespace detail

/// Calls fn(i, j) with i < j once per interacting pair, in scan order.
template <class Fn>
void for_each_cell_pair(const CellGrid& grid, const ParticleSystem& ps, const Domain& domain, Fn&& fn) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    detail::scan_cells(grid, ps, domain, i, i + 1, [&](std::size_t j, const Vec3&, double) { fn(i, j); });
  }
}

inline PairSet cell_pair_set(const CellGrid& grid, const ParticleSystem& ps, const Domain& domain) {
  PairSet pairs;
  for_each_cell_pair(grid, ps, domain, [&](std::size_t i, std::size_t j) {
    pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  });
  normalize(pairs);
  return pairs;
}

/// Cell-list force pass: every particle sums its own force over the stencil,
/// so no shared writes happen. Returns the unordered pair count.
inline std::uint64_t cell_forces(const CellGrid& grid, ParticleSystem& ps, const Domain& domain, const LjParams& lj,
                                 unsigned threads = 1) {
  const std::size_t n = ps.size();
  std::vector<std::uint64_t> directed(block_count(n, threads), 0);
  parallel_blocks(n, threads, [&](unsigned w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double ri = ps.radii[i];
      Vec3 force;
      detail::scan_cells(grid, ps, domain, i, 0, [&](std::size_t j, const Vec3& delta, double) {
        force += pair_force_from_delta(delta, i, j, std::max(ri, ps.radii[j]), lj);
        ++directed[w];
      });
      ps.forces[i] = force;
    }
  });
  std::uint64_t total = 0;
  for (auto d : directed) total += d;
  return total / 2;
}

inline ParticleSystem step_cell(const CellGrid& grid, ParticleSystem ps, const Domain& domain, const LjParams& lj,
                                unsigned threads = 1) {
  cell_forces(grid, ps, domain, lj, threads);
  integrate(ps, domain, lj.dt, threads);
  return ps;
}

}  // namespace orcs
