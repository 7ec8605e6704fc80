#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <algorithm>
#include <string>
#include <vector>

#include "orcs/simulation.hpp"

namespace orcs {

inline constexpr std::string_view kStepCsvHeader =
    "step,maintain_ms,query_ms,integrate_ms,rebuilt,k_u,interactions,mean_nodes_visited,avg_neighbors";

inline void write_step_row(std::ostream& os, const StepRecord& r) {
  os << r.step << ',' << r.maintain_ms << ',' << r.query_ms << ',' << r.integrate_ms << ',' << (r.rebuilt ? 1 : 0)
     << ',' << r.k_u << ',' << r.interactions << ',' << r.mean_nodes_visited << ',' << r.avg_neighbors << '\n';
}

enum class RunStatus { Completed, Failed, Skipped };

inline std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::Failed:
      return "failed";
    case RunStatus::Skipped:
      return "skipped";
  }
  return "?";
}

/// Aggregates of one experiment cell.
struct RunSummary {
  std::string name;
  RunStatus status = RunStatus::Completed;
  std::string error_kind;  // e.g. neighbor_list_overflow
  std::string message;
  /// Machine-readable `key=value` details of the failure, space separated.
  std::string error_fields;
  std::size_t steps = 0;
  double setup_ms = 0.0;
  double total_ms = 0.0;  // sum of step wall times
  double mean_step_ms = 0.0;
  double maintain_ms = 0.0;
  double query_ms = 0.0;
  double integrate_ms = 0.0;
  std::size_t rebuilds = 0;
  std::uint64_t interactions = 0;
  std::size_t peak_memory_bytes = 0;

  /// Time spent maintaining the structure and querying it, the quantity the
  /// maintenance policies compete on.
  double maintain_query_ms() const noexcept { return maintain_ms + query_ms; }
};

/// `<pdist>-<rdist>-<bc>-<engine>-<policy>-n<N>.csv`
inline std::string cell_file_name(const SimConfig& c) {
  return label(c.dist.particles) + "-" + label(c.dist.radii) + "-" + std::string(to_string(c.domain.bc)) + "-" +
         c.engine_label() + "-" + c.policy_label() + "-n" + std::to_string(c.n) + ".csv";
}

/// Runs one cell, streaming one CSV row per step to `csv` (header first, flushed
/// at the end). Engine failures are reported in the summary, not thrown.
/// on_step, when given, sees every record and the simulation after the step.
template <class OnStep>
RunSummary run_experiment(const SimConfig& config, std::ostream* csv, OnStep&& on_step) {
  using clock = std::chrono::steady_clock;
  RunSummary sum;
  sum.name = cell_file_name(config);
  if (csv) *csv << kStepCsvHeader << '\n';
  try {
    const auto t0 = clock::now();
    Simulation sim(config);
    sum.setup_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    for (std::size_t s = 0; s < config.steps; ++s) {
      const StepRecord rec = sim.step();
      if (csv) write_step_row(*csv, rec);
      sum.total_ms += rec.wall_ms;
      sum.maintain_ms += rec.maintain_ms;
      sum.query_ms += rec.query_ms;
      sum.integrate_ms += rec.integrate_ms;
      sum.rebuilds += rec.rebuilt ? 1 : 0;
      sum.interactions += rec.interactions;
      sum.peak_memory_bytes = std::max(sum.peak_memory_bytes, sim.memory_estimate());
      ++sum.steps;
      on_step(rec, sim);
    }
    sum.peak_memory_bytes = std::max(sum.peak_memory_bytes, sim.memory_estimate());
  } catch (const NeighborListOverflow& e) {
    sum.status = RunStatus::Failed;
    sum.error_kind = "neighbor_list_overflow";
    sum.message = e.what();
    sum.error_fields = "particle=" + std::to_string(e.particle()) + " required=" + std::to_string(e.required()) +
                       " capacity=" + std::to_string(e.capacity());
    // The list that would have been needed.
    sum.peak_memory_bytes = std::max(sum.peak_memory_bytes, config.n * config.k_max * sizeof(std::uint32_t));
  } catch (const Error& e) {
    sum.status = RunStatus::Failed;
    sum.error_kind = "runtime_error";
    sum.message = e.what();
  }
  if (sum.steps > 0) sum.mean_step_ms = sum.total_ms / static_cast<double>(sum.steps);
  if (csv) csv->flush();
  return sum;
}

inline RunSummary run_experiment(const SimConfig& config, std::ostream* csv = nullptr) {
  return run_experiment(config, csv, [](const StepRecord&, const Simulation&) {});
}

/// Mean-step-time ratio baseline / candidate; empty when either did not complete.
inline std::optional<double> speedup(const RunSummary& baseline, const RunSummary& candidate) {
  if (baseline.status != RunStatus::Completed || candidate.status != RunStatus::Completed) return std::nullopt;
  if (!(candidate.mean_step_ms > 0.0)) return std::nullopt;
  return baseline.mean_step_ms / candidate.mean_step_ms;
}

inline constexpr std::string_view kSummaryCsvHeader =
    "name,pdist,rdist,bc,engine,policy,n,steps,seed,status,error_kind,mean_step_ms,total_ms,maintain_ms,query_ms,"
    "integrate_ms,rebuilds,interactions,peak_memory_bytes,message";

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_summary_row(std::ostream& os, const SimConfig& c, const RunSummary& s) {
  os << s.name << ',' << label(c.dist.particles) << ',' << label(c.dist.radii) << ',' << to_string(c.domain.bc) << ','
     << c.engine_label() << ',' << c.policy_label() << ',' << c.n << ',' << c.steps << ',' << c.dist.seed << ','
     << to_string(s.status) << ',' << s.error_kind << ',' << s.mean_step_ms << ',' << s.total_ms << ','
     << s.maintain_ms << ',' << s.query_ms << ',' << s.integrate_ms << ',' << s.rebuilds << ',' << s.interactions
     << ',' << s.peak_memory_bytes << ',' << csv_escape(s.message) << '\n';
}

/// One expanded cell of an experiment matrix; skipped cells carry the reason.
struct MatrixCell {
  SimConfig config;
  std::optional<std::string> skip_reason;
};

}  // namespace orcs
