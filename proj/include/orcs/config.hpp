#pragma once

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "orcs/bench.hpp"
#include "orcs/error.hpp"
#include "orcs/simulation.hpp"

namespace orcs {

/// Raw configuration: key -> value text. Flags and file lines share keys.
using ConfigEntries = std::map<std::string, std::string>;

/// Every accepted key. Each one is also a `--key` command-line flag.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n",       "steps",      "box",     "bc",        "engine",    "mode",          "policy",
      "pdist",   "radius-dist", "epsilon", "sigma",     "dt",        "force-form",    "kmax",
      "threads", "deterministic", "seed",  "out",       "leaf-size", "speed",         "window",
      "ema-alpha", "r-min-guard", "delta-min", "ku-max"};
  return keys;
}

inline bool is_config_key(std::string_view key) {
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

inline double parse_double(const std::string& key, const std::string& text) {
  if (text.empty()) throw ConfigError(key, "expected a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + text + "'");
}

}  // namespace detail

/// `lattice`, `disordered`, `cluster`, `cluster:SIGMA` or `cluster:MX:MY:MZ[:SIGMA]`.
inline ParticleDist parse_particle_dist(const std::string& text) {
  const std::string key = "pdist";
  const auto parts = detail::split(text, ':');
  if (parts[0] == "lattice" && parts.size() == 1) return Lattice{};
  if (parts[0] == "disordered" && parts.size() == 1) return Disordered{};
  if (parts[0] == "cluster") {
    Cluster c;
    if (parts.size() == 2) {
      c.sigma = detail::parse_double(key, parts[1]);
    } else if (parts.size() == 4 || parts.size() == 5) {
      c.mu = Vec3{detail::parse_double(key, parts[1]), detail::parse_double(key, parts[2]),
                  detail::parse_double(key, parts[3])};
      if (parts.size() == 5) c.sigma = detail::parse_double(key, parts[4]);
    } else if (parts.size() != 1) {
      throw ConfigError(key, "cluster takes SIGMA or MX:MY:MZ[:SIGMA]");
    }
    return c;
  }
  throw ConfigError(key, "unknown particle distribution '" + text + "'");
}

/// `const:R`, `uniform:LO:HI` or `lognormal[:MU:SIGMA[:LO:HI]]`.
inline RadiusDist parse_radius_dist(const std::string& text) {
  const std::string key = "radius-dist";
  const auto parts = detail::split(text, ':');
  if (parts[0] == "const" && parts.size() == 2) return ConstRadius{detail::parse_double(key, parts[1])};
  if (parts[0] == "uniform" && parts.size() == 3) {
    return UniformRadius{detail::parse_double(key, parts[1]), detail::parse_double(key, parts[2])};
  }
  if (parts[0] == "lognormal" && (parts.size() == 1 || parts.size() == 3 || parts.size() == 5)) {
    LogNormalRadius l;
    if (parts.size() >= 3) {
      l.mu = detail::parse_double(key, parts[1]);
      l.sigma = detail::parse_double(key, parts[2]);
    }
    if (parts.size() == 5) {
      l.lo = detail::parse_double(key, parts[3]);
      l.hi = detail::parse_double(key, parts[4]);
    }
    return l;
  }
  throw ConfigError(key, "unknown radius distribution '" + text + "'");
}

/// `gradient`, `fixed:K` or `avg`.
inline PolicySpec parse_policy(const std::string& text) {
  const auto parts = detail::split(text, ':');
  if (parts[0] == "gradient" && parts.size() == 1) return GradientPolicy{};
  if (parts[0] == "avg" && parts.size() == 1) return AvgPolicy{};
  if (parts[0] == "fixed" && parts.size() == 2) {
    const auto k = detail::parse_unsigned("policy", parts[1]);
    if (k == 0) throw ConfigError("policy", "fixed period must be >= 1");
    return FixedKPolicy{static_cast<std::size_t>(k)};
  }
  throw ConfigError("policy", "unknown policy '" + text + "'");
}

/// Parses `key = value` lines; `#` starts a comment. Unknown keys are rejected.
inline ConfigEntries parse_config_text(std::string_view text) {
  ConfigEntries entries;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (!is_config_key(key)) throw ConfigError(key, "unknown key (line " + std::to_string(line_no) + ")");
    entries[key] = value;
  }
  return entries;
}

/// Builds and validates a SimConfig; absent keys keep their defaults. A missing
/// `threads` falls back to ORCS_THREADS, then the hardware concurrency.
inline SimConfig config_from_entries(const ConfigEntries& entries) {
  using namespace detail;
  SimConfig c;
  c.threads = default_threads();
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  for (const auto& [key, value] : entries) {
    if (!is_config_key(key)) throw ConfigError(key, "unknown key");
  }

  if (auto v = get("n")) c.n = parse_unsigned("n", *v);
  if (auto v = get("steps")) c.steps = parse_unsigned("steps", *v);
  double box = c.domain.side_length;
  BoundaryKind bc = c.domain.bc;
  if (auto v = get("box")) box = parse_double("box", *v);
  if (auto v = get("bc")) {
    if (*v == "wall") {
      bc = BoundaryKind::Wall;
    } else if (*v == "periodic") {
      bc = BoundaryKind::Periodic;
    } else {
      throw ConfigError("bc", "expected wall or periodic, got '" + *v + "'");
    }
  }
  if (!(box > 0.0)) throw ConfigError("box", "must be positive");
  c.domain = Domain(box, bc);

  auto parse_mode = [](const std::string& key, const std::string& m) {
    if (m == "list") return QueryMode::NeighborList;
    if (m == "perse") return QueryMode::Perse;
    if (m == "forces") return QueryMode::Forces;
    throw ConfigError(key, "expected list, perse or forces, got '" + m + "'");
  };
  if (auto v = get("engine")) {
    if (*v == "bvh") {
      c.engine = EngineKind::Bvh;
    } else if (*v == "cell") {
      c.engine = EngineKind::Cell;
    } else if (*v == "brute") {
      c.engine = EngineKind::Brute;
    } else if (v->rfind("bvh_", 0) == 0) {
      c.engine = EngineKind::Bvh;
      c.mode = parse_mode("engine", v->substr(4));
    } else {
      throw ConfigError("engine", "expected bvh, cell or brute, got '" + *v + "'");
    }
  }
  if (auto v = get("mode")) {
    const QueryMode m = parse_mode("mode", *v);
    if (auto e = get("engine"); e && e->rfind("bvh_", 0) == 0 && m != c.mode) {
      throw ConfigError("mode", "conflicts with engine '" + *e + "'");
    }
    c.mode = m;
  }
  if (auto v = get("policy")) c.policy.spec = parse_policy(*v);
  if (auto v = get("window")) {
    auto* g = std::get_if<GradientPolicy>(&c.policy.spec);
    if (!g) throw ConfigError("window", "only applies to the gradient policy");
    g->window = parse_unsigned("window", *v);
    if (g->window < 2) throw ConfigError("window", "needs at least 2 samples");
  }
  if (auto v = get("ema-alpha")) {
    c.policy.ema_alpha = parse_double("ema-alpha", *v);
    if (!(c.policy.ema_alpha > 0.0 && c.policy.ema_alpha <= 1.0)) throw ConfigError("ema-alpha", "must be in (0, 1]");
  }
  if (auto v = get("delta-min")) c.policy.limits.delta_min = parse_double("delta-min", *v);
  if (auto v = get("ku-max")) c.policy.limits.k_max = parse_unsigned("ku-max", *v);

  if (auto v = get("pdist")) c.dist.particles = parse_particle_dist(*v);
  if (auto v = get("radius-dist")) c.dist.radii = parse_radius_dist(*v);
  if (auto v = get("seed")) c.dist.seed = parse_unsigned("seed", *v);

  if (auto v = get("epsilon")) c.lj.epsilon = parse_double("epsilon", *v);
  if (auto v = get("sigma")) c.lj.sigma = parse_double("sigma", *v);
  if (auto v = get("dt")) c.lj.dt = parse_double("dt", *v);
  if (auto v = get("r-min-guard")) {
    c.lj.r_min_guard = parse_double("r-min-guard", *v);
  } else if (get("sigma")) {
    c.lj.r_min_guard = 0.5 * c.lj.sigma;
  }
  if (auto v = get("force-form")) {
    if (*v == "paper") {
      c.lj.force_form = ForceForm::PotentialBracket;
    } else if (*v == "standard") {
      c.lj.force_form = ForceForm::Standard;
    } else {
      throw ConfigError("force-form", "expected paper or standard, got '" + *v + "'");
    }
  }

  if (auto v = get("kmax")) c.k_max = parse_unsigned("kmax", *v);
  if (auto v = get("threads")) c.threads = static_cast<unsigned>(parse_unsigned("threads", *v));
  if (auto v = get("deterministic")) c.deterministic = parse_bool("deterministic", *v);
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("leaf-size")) c.leaf_size = parse_unsigned("leaf-size", *v);
  if (auto v = get("speed")) c.init_speed = parse_double("speed", *v);

  c.validate();
  return c;
}

/// File entries first, flags on top.
inline SimConfig parse_config(const ConfigEntries& flags, std::string_view file_text = {}) {
  ConfigEntries merged = parse_config_text(file_text);
  for (const auto& [k, v] : flags) merged[k] = v;
  return config_from_entries(merged);
}

/// Experiment matrix file: same keys as a config file, but any value may be a
/// comma-separated list. Cells are the cartesian product in key order.
/// Perse with a non-const radius distribution is skipped with a reason;
/// non-BVH engines ignore mode/policy, so their duplicates are dropped.
inline std::vector<MatrixCell> expand_matrix(std::string_view text) {
  const ConfigEntries raw = parse_config_text(text);
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& [k, v] : raw) axes.emplace_back(k, detail::split(v, ','));

  std::vector<MatrixCell> cells;
  std::set<std::string> seen;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    ConfigEntries entries;
    for (std::size_t a = 0; a < axes.size(); ++a) entries[axes[a].first] = axes[a].second[idx[a]];

    const auto mode_it = entries.find("mode");
    const auto engine_it = entries.find("engine");
    const bool perse = (mode_it != entries.end() && mode_it->second == "perse") ||
                       (engine_it != entries.end() && engine_it->second == "bvh_perse");
    const bool bvh = engine_it == entries.end() || engine_it->second.rfind("bvh", 0) == 0;
    const auto rd = entries.find("radius-dist");
    const bool variable = rd != entries.end() && !is_uniform(parse_radius_dist(rd->second));

    MatrixCell cell;
    if (bvh && perse && variable) {
      ConfigEntries fallback = entries;
      fallback["mode"] = "forces";
      if (engine_it != entries.end()) fallback["engine"] = "bvh";
      cell.config = config_from_entries(fallback);
      cell.config.mode = QueryMode::Perse;
      cell.skip_reason = "perse requires a uniform radius";
    } else {
      cell.config = config_from_entries(entries);
    }
    if (seen.insert(cell_file_name(cell.config) + "#" + std::to_string(cell.config.steps)).second) {
      cells.push_back(std::move(cell));
    }

    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].second.size()) break;
      idx[a] = 0;
      if (a == 0) return cells;
    }
    if (axes.empty()) return cells;
  }
}

}  // namespace orcs
