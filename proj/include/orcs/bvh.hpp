#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "orcs/domain.hpp"
#include "orcs/error.hpp"
#include "orcs/particles.hpp"

namespace orcs {

/// Counters accumulated by one or more point queries.
struct TraversalStats {
  std::uint64_t queries = 0;
  std::uint64_t nodes_visited = 0;  // nodes whose box contained the query point
  std::uint64_t leaves_visited = 0;
  std::uint64_t sphere_tests = 0;
  std::uint64_t hits = 0;

  TraversalStats& operator+=(const TraversalStats& o) noexcept {
    queries += o.queries;
    nodes_visited += o.nodes_visited;
    leaves_visited += o.leaves_visited;
    sphere_tests += o.sphere_tests;
    hits += o.hits;
    return *this;
  }

  double mean_nodes_visited() const noexcept {
    return queries == 0 ? 0.0 : static_cast<double>(nodes_visited) / static_cast<double>(queries);
  }
};

struct BvhNode {
  Aabb box;
  // Internal node: left child is the next node, `index` is the right child.
  // Leaf: `index` is the first slot in prim_order, `count` > 0 primitives.
  std::uint32_t index = 0;
  std::uint32_t count = 0;

  bool leaf() const noexcept { return count > 0; }
};

namespace detail {

// Spread the low 10 bits of v so there are two zero bits between each.
constexpr std::uint32_t expand_bits_10(std::uint32_t v) noexcept {
  v &= 0x3FFu;
  v = (v | (v << 16)) & 0x030000FFu;
  v = (v | (v << 8)) & 0x0300F00Fu;
  v = (v | (v << 4)) & 0x030C30C3u;
  v = (v | (v << 2)) & 0x09249249u;
  return v;
}

}  // namespace detail

/// 30-bit Morton code of p on a 1024^3 grid over [0, L]^3.
inline std::uint32_t morton_code(const Vec3& p, double side_length) noexcept {
  const double scale = 1024.0 / side_length;
  auto quantize = [scale](double c) {
    const double q = std::floor(c * scale);
    return static_cast<std::uint32_t>(std::clamp(q, 0.0, 1023.0));
  };
  return (detail::expand_bits_10(quantize(p.x)) << 2) | (detail::expand_bits_10(quantize(p.y)) << 1) |
         detail::expand_bits_10(quantize(p.z));
}

/// Binary BVH over particle search spheres (center = position, half-extent =
/// radius). Built LBVH-style and refit in place; query phase is read-only.
class Bvh {
 public:
  static constexpr std::size_t kDefaultLeafSize = 8;  // measured best of {2, 4, 8, 16} on sparse and clustered runs
  static constexpr std::size_t kStackDepth = 128;

  Bvh() = default;

  static Bvh build(const ParticleSystem& ps, const Domain& domain, std::size_t leaf_size = kDefaultLeafSize) {
    Bvh bvh;
    bvh.build_in_place(ps, domain, leaf_size);
    return bvh;
  }

  /// Rebuild from scratch, reusing allocations.
  void build_in_place(const ParticleSystem& ps, const Domain& domain, std::size_t leaf_size = kDefaultLeafSize) {
    const std::size_t n = ps.size();
    if (n == 0) throw StructuralError("cannot build a BVH over zero particles");
    if (n > std::numeric_limits<std::uint32_t>::max() / 2) throw CapacityError("too many particles for BVH");
    leaf_size_ = std::max<std::size_t>(1, leaf_size);
    epoch_ = 0;
    side_ = domain.side_length;
    overhang_ = 0.0;
    if (domain.periodic()) {
      images_.assign(ps.positions.begin(), ps.positions.end());
    } else {
      images_.clear();
    }

    keyed_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      keyed_[i] = (static_cast<std::uint64_t>(morton_code(ps.positions[i], domain.side_length)) << 32) |
                  static_cast<std::uint32_t>(i);
    }
    std::sort(keyed_.begin(), keyed_.end());
    prim_order_.resize(n);
    codes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      prim_order_[i] = static_cast<std::uint32_t>(keyed_[i] & 0xFFFFFFFFu);
      codes_[i] = static_cast<std::uint32_t>(keyed_[i] >> 32);
    }

    nodes_.clear();
    nodes_.reserve(2 * (n / leaf_size_ + 1));
    build_range(0, static_cast<std::uint32_t>(n));
    refit_boxes(ps);
  }

  /// Recompute all boxes for the current positions/radii without touching topology.
  void refit(const ParticleSystem& ps) {
    if (ps.size() != prim_order_.size()) {
      throw StructuralError("refit over " + std::to_string(ps.size()) + " particles, BVH holds " +
                            std::to_string(prim_order_.size()));
    }
    if (!images_.empty()) unwrap_images(ps);
    refit_boxes(ps);
    ++epoch_;
  }

  /// Visit every primitive stored in a leaf whose box (grown by `slack`)
  /// contains q. Callers apply their own primitive test.
  template <class Visitor>
  void for_each_candidate(const Vec3& q, double slack, TraversalStats& stats, Visitor&& visit) const {
    ++stats.queries;
    if (nodes_.empty()) return;
    std::array<std::uint32_t, kStackDepth> stack;
    std::size_t top = 0;
    stack[top++] = 0;
    std::uint64_t visited = 0;
    std::uint64_t leaves = 0;
    while (top > 0) {
      const std::uint32_t id = stack[--top];
      const BvhNode& node = nodes_[id];
      if (!node.box.contains(q, slack)) continue;
      ++visited;
      if (node.leaf()) {
        ++leaves;
        const std::uint32_t end = node.index + node.count;
        for (std::uint32_t k = node.index; k < end; ++k) visit(prim_order_[k]);
      } else {
        stack[top++] = node.index;
        stack[top++] = id + 1;
      }
    }
    stats.nodes_visited += visited;
    stats.leaves_visited += leaves;
  }

  /// Calls visit(j) once for every j != exclude with |q - p_j| < r_j.
  template <class Visitor>
  void query_point(const ParticleSystem& ps, const Vec3& q, std::size_t exclude, Visitor&& visit,
                   TraversalStats& stats) const {
    for_each_candidate(q, 0.0, stats, [&](std::uint32_t j) {
      if (j == exclude) return;
      ++stats.sphere_tests;
      const double r = ps.radii[j];
      if (norm2(q - stored(ps, j)) < r * r) {
        ++stats.hits;
        visit(static_cast<std::size_t>(j));
      }
    });
  }

  /// Position the tree indexes for particle j. Under periodic boundaries this
  /// is the particle's unwrapped image since the last build, which may lie
  /// up to overhang() outside the box.
  const Vec3& stored(const ParticleSystem& ps, std::size_t j) const noexcept {
    return images_.empty() ? ps.positions[j] : images_[j];
  }
  /// Largest distance any stored image lies outside [0, L] on any axis.
  double overhang() const noexcept { return overhang_; }

  const std::vector<BvhNode>& nodes() const noexcept { return nodes_; }
  const std::vector<std::uint32_t>& prim_order() const noexcept { return prim_order_; }
  std::size_t leaf_size() const noexcept { return leaf_size_; }
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t size() const noexcept { return prim_order_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  const Aabb& bounds() const { return nodes_.front().box; }

  std::size_t depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> level(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      deepest = std::max(deepest, level[id]);
      if (!nodes_[id].leaf()) {
        level[id + 1] = level[id] + 1;
        level[nodes_[id].index] = level[id] + 1;
      }
    }
    return deepest + 1;
  }

  std::size_t memory_bytes() const noexcept {
    return nodes_.capacity() * sizeof(BvhNode) + prim_order_.capacity() * sizeof(std::uint32_t) +
           codes_.capacity() * sizeof(std::uint32_t) + keyed_.capacity() * sizeof(std::uint64_t) +
           images_.capacity() * sizeof(Vec3);
  }

 private:
  // Nodes are emitted in pre-order, so children always have larger indices
  // than their parent and a reverse sweep is a valid bottom-up order.
  std::uint32_t build_range(std::uint32_t lo, std::uint32_t hi) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    if (hi - lo <= leaf_size_) {
      nodes_[id].index = lo;
      nodes_[id].count = hi - lo;
      return id;
    }
    const std::uint32_t split = find_split(lo, hi);
    build_range(lo, split);
    const std::uint32_t right = build_range(split, hi);
    nodes_[id].index = right;
    return id;
  }

  // Split at the highest bit where the first and last code of the range
  // differ; identical codes fall back to the median.
  std::uint32_t find_split(std::uint32_t lo, std::uint32_t hi) const {
    const std::uint32_t first = codes_[lo];
    const std::uint32_t last = codes_[hi - 1];
    if (first == last) return lo + (hi - lo) / 2;
    const int prefix = std::countl_zero(first ^ last);
    // First index whose code has the differing bit set.
    std::uint32_t a = lo;
    std::uint32_t b = hi - 1;
    while (a + 1 < b) {
      const std::uint32_t mid = a + (b - a) / 2;
      if (std::countl_zero(first ^ codes_[mid]) > prefix) {
        a = mid;
      } else {
        b = mid;
      }
    }
    return b;
  }

  // Periodic refit: follow each particle to the image nearest its previous
  // one, so a particle crossing a face does not stretch its leaf (and every
  // ancestor) across the box. Falls back to wrapped positions once images
  // drift far enough that ghost queries could become ambiguous.
  void unwrap_images(const ParticleSystem& ps) {
    const double L = side_;
    double over = 0.0;
    for (std::size_t i = 0; i < images_.size(); ++i) {
      Vec3 s = ps.positions[i];
      for (int c = 0; c < 3; ++c) {
        s[c] += L * std::round((images_[i][c] - s[c]) / L);
        over = std::max(over, std::max(-s[c], s[c] - L));
      }
      images_[i] = s;
    }
    if (!(ps.max_radius + over < 0.25 * L)) {
      images_.assign(ps.positions.begin(), ps.positions.end());
      over = 0.0;
    }
    overhang_ = over;
  }

  void refit_boxes(const ParticleSystem& ps) {
    for (std::size_t id = nodes_.size(); id-- > 0;) {
      BvhNode& node = nodes_[id];
      if (node.leaf()) {
        Aabb box;
        const std::uint32_t end = node.index + node.count;
        for (std::uint32_t k = node.index; k < end; ++k) {
          const std::uint32_t p = prim_order_[k];
          box.expand(Aabb::around_sphere(stored(ps, p), ps.radii[p]));
        }
        node.box = box;
      } else {
        node.box = merge(nodes_[id + 1].box, nodes_[node.index].box);
      }
    }
  }

  std::vector<BvhNode> nodes_;
  std::vector<std::uint32_t> prim_order_;
  std::vector<std::uint32_t> codes_;
  std::vector<std::uint64_t> keyed_;
  std::vector<Vec3> images_;  // periodic only
  std::size_t leaf_size_ = kDefaultLeafSize;
  std::size_t epoch_ = 0;
  double side_ = 0.0;
  double overhang_ = 0.0;
};

}  // namespace orcs
