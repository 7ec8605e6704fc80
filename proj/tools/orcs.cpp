// orcs: run, benchmark and validate the FRNN particle engines.
//
// Exit codes: 0 success, 1 runtime failure (including neighbor-list
// overflow), 2 configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "orcs/orcs.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

const std::map<std::string, std::string>& flag_help() {
  static const std::map<std::string, std::string> help = {
      {"n", "number of particles (default 20000)"},
      {"steps", "time steps (default 500)"},
      {"box", "box side length L (default 1000)"},
      {"bc", "boundary condition: wall | periodic"},
      {"engine", "bvh | cell | brute (or bvh_list, bvh_perse, bvh_forces)"},
      {"mode", "BVH query mode: list | perse | forces"},
      {"policy", "BVH maintenance: gradient | fixed:K | avg"},
      {"pdist", "particles: lattice | disordered | cluster[:MX:MY:MZ][:SIGMA]"},
      {"radius-dist", "radii: const:R | uniform:LO:HI | lognormal[:MU:SIGMA[:LO:HI]]"},
      {"epsilon", "LJ well depth"},
      {"sigma", "LJ zero crossing"},
      {"dt", "time step"},
      {"force-form", "LJ force expression: paper | standard"},
      {"kmax", "neighbor-list slots per particle (default 1024)"},
      {"threads", "worker threads (fallback: ORCS_THREADS, then all cores)"},
      {"deterministic", "order-independent force reduction (true | false)"},
      {"seed", "RNG seed (default 1)"},
      {"out", "output file (simulate, dump) or directory (bench)"},
      {"leaf-size", "BVH primitives per leaf (default 8)"},
      {"speed", "std. deviation of initial Gaussian velocities (default 0)"},
      {"window", "gradient policy regression window"},
      {"ema-alpha", "gradient policy smoothing factor"},
      {"r-min-guard", "LJ distance floor (default sigma/2)"},
      {"delta-min", "query-growth floor below which k_u saturates"},
      {"ku-max", "upper bound on k_u"},
  };
  return help;
}

/// Registers every config key as `--key VALUE`; set values land in `entries`.
void add_config_flags(CLI::App& app, orcs::ConfigEntries& entries, std::string& config_file) {
  app.add_option("--config", config_file, "key = value configuration file; flags override it");
  for (const auto& key : orcs::config_keys()) {
    const std::string& help = flag_help().at(key);
    if (key == "deterministic") {
      app.add_option_function<std::string>(
             "--" + key, [&entries, key](const std::string& v) { entries[key] = v; }, help)
          ->expected(0, 1)
          ->default_str("true");
      continue;
    }
    app.add_option_function<std::string>(
        "--" + key, [&entries, key](const std::string& v) { entries[key] = v; }, help);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw orcs::ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

orcs::SimConfig load_config(const orcs::ConfigEntries& flags, const std::string& config_file) {
  return orcs::parse_config(flags, config_file.empty() ? std::string{} : read_file(config_file));
}

int report_failure(const orcs::RunSummary& s) {
  std::cerr << "error: kind=" << s.error_kind;
  if (!s.error_fields.empty()) std::cerr << ' ' << s.error_fields;
  std::cerr << " message=\"" << s.message << "\"\n";
  return kExitRuntime;
}

void print_summary(std::ostream& os, const orcs::RunSummary& s) {
  os << s.name << ": " << to_string(s.status) << ", " << s.steps << " steps, mean step " << s.mean_step_ms
     << " ms (maintain " << s.maintain_ms << ", query " << s.query_ms << ", integrate " << s.integrate_ms
     << " ms total), " << s.rebuilds << " rebuilds, " << s.interactions << " interactions\n";
}

int cmd_simulate(const orcs::SimConfig& cfg) {
  std::ofstream file;
  std::ostream* csv = &std::cout;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) throw orcs::ConfigError("out", "cannot write '" + cfg.out + "'");
    csv = &file;
  }
  const orcs::RunSummary s = orcs::run_experiment(cfg, csv);
  if (s.status != orcs::RunStatus::Completed) return report_failure(s);
  print_summary(std::cerr, s);
  return kExitOk;
}

int cmd_bench(const std::string& matrix_path, const std::string& out_dir, const orcs::ConfigEntries& overrides) {
  std::string text = read_file(matrix_path);
  // Flags pin a single value for their key.
  for (const auto& [k, v] : overrides) text += "\n" + k + " = " + v + "\n";
  const auto cells = orcs::expand_matrix(text);

  std::filesystem::create_directories(out_dir);
  std::ofstream summary(std::filesystem::path(out_dir) / "summary.csv");
  if (!summary) throw orcs::ConfigError("out", "cannot write into '" + out_dir + "'");
  summary << orcs::kSummaryCsvHeader << '\n';

  std::size_t failed = 0;
  for (const auto& cell : cells) {
    orcs::RunSummary s;
    s.name = orcs::cell_file_name(cell.config);
    if (cell.skip_reason) {
      s.status = orcs::RunStatus::Skipped;
      s.message = *cell.skip_reason;
      std::cerr << s.name << ": skipped (" << s.message << ")\n";
    } else {
      std::ofstream csv(std::filesystem::path(out_dir) / s.name);
      s = orcs::run_experiment(cell.config, &csv);
      if (s.status == orcs::RunStatus::Failed) {
        ++failed;
        std::cerr << s.name << ": failed (" << s.error_kind << ": " << s.message << ")\n";
      } else {
        print_summary(std::cerr, s);
      }
    }
    orcs::write_summary_row(summary, cell.config, s);
    summary.flush();
  }
  std::cerr << cells.size() << " cells, " << failed << " failed\n";
  return kExitOk;
}

int cmd_dump(const orcs::SimConfig& cfg, bool run_steps) {
  orcs::Simulation sim(cfg);
  if (run_steps) {
    for (std::size_t s = 0; s < cfg.steps; ++s) sim.step();
  }
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!cfg.out.empty()) {
    file.open(cfg.out);
    if (!file) throw orcs::ConfigError("out", "cannot write '" + cfg.out + "'");
    os = &file;
  }
  const auto& ps = sim.particles();
  *os << std::setprecision(17) << ps.size() << ' ' << cfg.domain.side_length << '\n';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& p = ps.positions[i];
    *os << p.x << ' ' << p.y << ' ' << p.z << ' ' << ps.radii[i] << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FRNN particle simulation engines and benchmark harness"};
  app.require_subcommand(1);

  orcs::ConfigEntries sim_flags;
  std::string sim_config;
  auto* simulate = app.add_subcommand("simulate", "run one configuration, per-step CSV to --out or stdout");
  add_config_flags(*simulate, sim_flags, sim_config);

  orcs::ConfigEntries bench_flags;
  std::string matrix_path;
  std::string bench_out = "bench_out";
  auto* bench = app.add_subcommand("bench", "run an experiment matrix; one CSV per cell plus summary.csv");
  bench->add_option("--matrix", matrix_path, "matrix file: config keys with comma-separated value lists")
      ->required();
  bench->add_option("--out", bench_out, "output directory")->capture_default_str();
  bench->add_option_function<std::string>(
      "--threads", [&](const std::string& v) { bench_flags["threads"] = v; }, "worker threads for every cell");
  bench->add_option_function<std::string>(
      "--steps", [&](const std::string& v) { bench_flags["steps"] = v; }, "override steps for every cell");

  std::uint64_t validate_seed = 1;
  auto* validate = app.add_subcommand("validate", "run the oracle-equivalence suite");
  validate->add_option("--seed", validate_seed, "seed for the randomized instances")->capture_default_str();

  orcs::ConfigEntries dump_flags;
  std::string dump_config;
  auto* dump = app.add_subcommand(
      "dump", "write a particle snapshot (`n L` then `x y z r` lines); initial state unless --steps is given");
  add_config_flags(*dump, dump_flags, dump_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(load_config(sim_flags, sim_config));
    if (*bench) return cmd_bench(matrix_path, bench_out, bench_flags);
    if (*validate) {
      orcs::ValidationOptions opts;
      opts.seed = validate_seed;
      const auto report = orcs::run_validation(opts);
      orcs::print_report(std::cout, report);
      return report.passed() ? kExitOk : kExitRuntime;
    }
    if (*dump) {
      const bool run_steps = dump_flags.count("steps") > 0;
      return cmd_dump(load_config(dump_flags, dump_config), run_steps);
    }
  } catch (const orcs::ConfigError& e) {
    std::cerr << "error: kind=config key=" << (e.key().empty() ? "-" : e.key()) << " message=\"" << e.what()
              << "\"\n";
    return kExitConfig;
  } catch (const orcs::NeighborListOverflow& e) {
    std::cerr << "error: kind=neighbor_list_overflow particle=" << e.particle() << " required=" << e.required()
              << " capacity=" << e.capacity() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: kind=runtime_error message=\"" << e.what() << "\"\n";
    return kExitRuntime;
  }
  return kExitOk;
}
