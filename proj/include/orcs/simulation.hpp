#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "orcs/bvh.hpp"
#include "orcs/cell_list.hpp"
#include "orcs/distributions.hpp"
#include "orcs/domain.hpp"
#include "orcs/engine.hpp"
#include "orcs/lj.hpp"
#include "orcs/parallel.hpp"
#include "orcs/policy.hpp"

namespace orcs {

enum class EngineKind { Bvh, Cell, Brute };

inline std::string_view to_string(EngineKind kind) noexcept {
  switch (kind) {
    case EngineKind::Bvh:
      return "bvh";
    case EngineKind::Cell:
      return "cell";
    case EngineKind::Brute:
      return "brute";
  }
  return "?";
}

/// Everything needed to run one experiment cell.
struct SimConfig {
  std::size_t n = 20000;
  std::size_t steps = 500;
  Domain domain{1000.0, BoundaryKind::Wall};
  EngineKind engine = EngineKind::Bvh;
  QueryMode mode = QueryMode::Forces;
  PolicyConfig policy{};
  DistributionSpec dist{};
  LjParams lj{};
  std::size_t k_max = 1024;
  std::size_t leaf_size = Bvh::kDefaultLeafSize;
  /// Standard deviation of the initial Gaussian velocities; 0 starts at rest.
  double init_speed = 0.0;
  unsigned threads = 1;
  bool deterministic = false;
  std::size_t oracle_limit = kDefaultOracleLimit;
  std::string out;

  /// Largest radius the distribution can produce.
  double radius_bound() const {
    return std::visit(detail::overloaded{[](const ConstRadius& c) { return c.r; },
                                         [](const UniformRadius& u) { return u.hi; },
                                         [](const LogNormalRadius& l) { return l.hi; }},
                      dist.radii);
  }

  void validate() const {
    if (n == 0) throw ConfigError("n", "need at least one particle");
    if (k_max == 0) throw ConfigError("kmax", "must be positive");
    if (leaf_size == 0) throw ConfigError("leaf-size", "must be positive");
    if (threads == 0) throw ConfigError("threads", "must be positive");
    if (!(init_speed >= 0.0)) throw ConfigError("speed", "must be non-negative");
    orcs::validate(dist);
    lj.validate();
    if (engine == EngineKind::Bvh && mode == QueryMode::Perse && !is_uniform(dist.radii)) {
      throw ConfigError("mode", "perse requires a uniform (const) radius distribution");
    }
    if (engine == EngineKind::Brute && n > oracle_limit) {
      throw ConfigError("engine", "brute engine limited to n <= " + std::to_string(oracle_limit));
    }
    if (radius_bound() > domain.side_length) {
      throw ConfigError("radius-dist", "search radius exceeds the box length");
    }
    if (domain.periodic() && !(radius_bound() < 0.5 * domain.side_length)) {
      throw ConfigError("radius-dist", "periodic boundaries need radii below half the box length");
    }
  }

  /// Engine label used in file names and reports, e.g. "bvh_forces" or "cell".
  std::string engine_label() const {
    if (engine == EngineKind::Bvh) return "bvh_" + std::string(to_string(mode));
    return std::string(to_string(engine));
  }

  std::string policy_label() const { return engine == EngineKind::Bvh ? label(policy.spec) : "none"; }
};

/// One row of the per-step CSV.
struct StepRecord {
  std::size_t step = 0;
  double maintain_ms = 0.0;
  double query_ms = 0.0;
  double integrate_ms = 0.0;
  bool rebuilt = false;
  std::size_t k_u = 0;
  std::uint64_t interactions = 0;
  double mean_nodes_visited = 0.0;
  double avg_neighbors = 0.0;
  double wall_ms = 0.0;  // whole step including the policy decision
};

/// Runs maintain -> query -> integrate per step with a timer around each phase.
class Simulation {
 public:
  explicit Simulation(SimConfig config) : config_(std::move(config)), policy_(config_.policy) {
    config_.validate();
    ps_ = generate_particles(config_.dist, config_.n, config_.domain);
    assign_velocities(ps_, config_.init_speed, config_.dist.seed);
  }

  Simulation(SimConfig config, ParticleSystem initial)
      : config_(std::move(config)), policy_(config_.policy), ps_(std::move(initial)) {
    ps_.refresh_radius_info();
    config_.n = ps_.size();
    // Describe the supplied radii so validation sees the real bounds.
    if (ps_.uniform_radius) {
      config_.dist.radii = ConstRadius{ps_.max_radius};
    } else {
      config_.dist.radii = UniformRadius{*std::min_element(ps_.radii.begin(), ps_.radii.end()), ps_.max_radius};
    }
    config_.validate();
  }

  StepRecord step() {
    using clock = std::chrono::steady_clock;
    const auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

    StepRecord rec;
    rec.step = step_index_;
    const auto t_start = clock::now();
    PassStats stats;

    switch (config_.engine) {
      case EngineKind::Bvh: {
        const Maintenance decision = policy_.decide(last_sample_);
        const auto t0 = clock::now();
        rec.rebuilt = decision == Maintenance::Rebuild || bvh_.empty();
        if (rec.rebuilt) {
          bvh_.build_in_place(ps_, config_.domain, config_.leaf_size);
        } else {
          bvh_.refit(ps_);
        }
        const auto t1 = clock::now();
        stats = run_query();
        const auto t2 = clock::now();
        run_integration();
        const auto t3 = clock::now();
        rec.maintain_ms = ms(t1 - t0);
        rec.query_ms = ms(t2 - t1);
        rec.integrate_ms = ms(t3 - t2);
        rec.k_u = policy_.k_u_current();
        last_sample_ = StepSample{rec.maintain_ms * 1e-3, rec.query_ms * 1e-3, rec.rebuilt};
        break;
      }
      case EngineKind::Cell: {
        const auto t0 = clock::now();
        grid_ = build_grid(ps_, config_.domain);
        const auto t1 = clock::now();
        stats.interactions = cell_forces(grid_, ps_, config_.domain, config_.lj, config_.threads);
        const auto t2 = clock::now();
        integrate(ps_, config_.domain, config_.lj.dt, config_.threads);
        const auto t3 = clock::now();
        rec.rebuilt = true;
        rec.maintain_ms = ms(t1 - t0);
        rec.query_ms = ms(t2 - t1);
        rec.integrate_ms = ms(t3 - t2);
        break;
      }
      case EngineKind::Brute: {
        const auto t1 = clock::now();
        stats.interactions = brute_force_forces(ps_, config_.domain, config_.lj, config_.oracle_limit);
        const auto t2 = clock::now();
        integrate(ps_, config_.domain, config_.lj.dt, config_.threads);
        const auto t3 = clock::now();
        rec.query_ms = ms(t2 - t1);
        rec.integrate_ms = ms(t3 - t2);
        break;
      }
    }

    rec.wall_ms = ms(clock::now() - t_start);
    rec.interactions = stats.interactions;
    rec.mean_nodes_visited = stats.traversal.mean_nodes_visited();
    rec.avg_neighbors = 2.0 * static_cast<double>(stats.interactions) / static_cast<double>(ps_.size());
    last_stats_ = stats;
    ++step_index_;
    return rec;
  }

  const SimConfig& config() const noexcept { return config_; }
  const ParticleSystem& particles() const noexcept { return ps_; }
  ParticleSystem& particles() noexcept { return ps_; }
  /// Mutable so callers can change dt between steps.
  LjParams& lj() noexcept { return config_.lj; }
  const Bvh& bvh() const noexcept { return bvh_; }
  const MaintenancePolicy& policy() const noexcept { return policy_; }
  const PassStats& last_pass_stats() const noexcept { return last_stats_; }
  const NeighborList& neighbor_list() const noexcept { return list_; }
  std::size_t steps_done() const noexcept { return step_index_; }

  /// Bytes held by the state and the engine's structures. The neighbor-list
  /// mode is charged n * k_max * sizeof(index) whether or not it got that far.
  std::size_t memory_estimate() const noexcept {
    const std::size_t n = ps_.size();
    std::size_t bytes = n * (3 * sizeof(Vec3) + sizeof(double));
    switch (config_.engine) {
      case EngineKind::Bvh:
        bytes += bvh_.memory_bytes();
        if (config_.mode == QueryMode::NeighborList) {
          bytes += n * config_.k_max * sizeof(std::uint32_t) + n * sizeof(std::uint32_t);
        }
        if (config_.mode == QueryMode::Perse) bytes += n * (3 * sizeof(Vec3) + sizeof(double));
        break;
      case EngineKind::Cell:
        bytes += grid_.memory_bytes();
        break;
      case EngineKind::Brute:
        break;
    }
    return bytes;
  }

 private:
  EngineOptions engine_options() const {
    EngineOptions o;
    o.threads = config_.threads;
    o.deterministic = config_.deterministic;
    return o;
  }

  PassStats run_query() {
    const EngineOptions opts = engine_options();
    switch (config_.mode) {
      case QueryMode::Forces:
        return accumulate_forces(bvh_, ps_, config_.domain, config_.lj, opts);
      case QueryMode::Perse: {
        if (back_.size() != ps_.size()) back_ = ps_;
        const PassStats st = perse_pass(bvh_, ps_, back_, config_.domain, config_.lj, opts);
        std::swap(ps_, back_);
        return st;
      }
      case QueryMode::NeighborList:
        return build_neighbor_list(bvh_, ps_, config_.domain, config_.k_max, list_, opts);
    }
    return {};
  }

  void run_integration() {
    switch (config_.mode) {
      case QueryMode::Forces:
        integrate(ps_, config_.domain, config_.lj.dt, config_.threads);
        break;
      case QueryMode::Perse:
        break;  // moved inside the query pass
      case QueryMode::NeighborList:
        apply_neighbor_forces(list_, ps_, config_.domain, config_.lj, config_.threads);
        integrate(ps_, config_.domain, config_.lj.dt, config_.threads);
        break;
    }
  }

  SimConfig config_;
  MaintenancePolicy policy_;
  ParticleSystem ps_;
  ParticleSystem back_;
  Bvh bvh_;
  CellGrid grid_;
  NeighborList list_;
  std::optional<StepSample> last_sample_;
  PassStats last_stats_;
  std::size_t step_index_ = 0;
};

}  // namespace orcs
