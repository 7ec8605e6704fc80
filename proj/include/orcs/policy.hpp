#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "orcs/error.hpp"

namespace orcs {

/// Inputs of the refit/rebuild cost model. Times in seconds.
struct CostModelParams {
  double t_r = 0.0;      // rebuild
  double t_u = 0.0;      // refit
  double t_q = 0.0;      // query on a fresh tree
  double delta_q = 0.0;  // extra query cost per consecutive refit step
  double n_steps = 1.0;
};

/// Total maintain+query time of a run that alternates one rebuild with k_u refits.
inline double total_cost(const CostModelParams& p, std::size_t k_u) noexcept {
  const double k = static_cast<double>(k_u);
  return p.n_steps / (k + 1.0) * ((k * (k * p.delta_q)) / 2.0 + k * (p.t_u + p.t_q) + (p.t_r + p.t_q));
}

struct KuLimits {
  double delta_min = 1e-9;  // seconds/step; slopes at or below this count as "no degradation"
  std::size_t k_max = 10'000;
};

/// Minimizer of total_cost over real k_u, rounded to the nearest integer and
/// clamped to [0, k_max]. No measurable degradation defers the rebuild to k_max.
inline std::size_t k_u_opt(double t_u, double t_r, double delta_q, const KuLimits& limits = {}) noexcept {
  if (!(delta_q > limits.delta_min)) return limits.k_max;
  const double radicand = 1.0 - 2.0 * ((t_u - t_r) / delta_q);
  if (!(radicand >= 0.0)) return limits.k_max;
  const double k = std::round(-1.0 + std::sqrt(radicand));
  if (!(k > 0.0)) return 0;
  if (k >= static_cast<double>(limits.k_max)) return limits.k_max;
  return static_cast<std::size_t>(k);
}

enum class Maintenance { Rebuild, Update };

struct GradientPolicy {
  std::size_t window = 32;
};
struct FixedKPolicy {
  std::size_t k = 200;
};
struct AvgPolicy {};
using PolicySpec = std::variant<GradientPolicy, FixedKPolicy, AvgPolicy>;

inline std::string label(const PolicySpec& spec) {
  if (std::holds_alternative<GradientPolicy>(spec)) return "gradient";
  if (const auto* f = std::get_if<FixedKPolicy>(&spec)) return "fixed" + std::to_string(f->k);
  return "avg";
}

struct PolicyConfig {
  PolicySpec spec = GradientPolicy{};
  double ema_alpha = 0.3;
  KuLimits limits{};
  std::size_t min_slope_samples = 3;
};

/// What the policy sees of a finished step.
struct StepSample {
  double maintain_s = 0.0;
  double query_s = 0.0;
  bool rebuilt = false;
};

/// Least-squares slope of y over x. Needs two distinct x values, else 0.
template <class Samples>
double least_squares_slope(const Samples& samples) noexcept {
  const double n = static_cast<double>(samples.size());
  if (samples.size() < 2) return 0.0;
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : samples) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : samples) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

/// Copy of (x, y) samples with y clipped to median +- 3 scaled MADs, so single
/// timer outliers (preemption, cache storms) cannot steer a least-squares fit.
/// A genuine sawtooth of degrading cycles has a wide MAD and passes unchanged.
template <class Samples>
Samples winsorized(const Samples& samples) {
  if (samples.size() < 3) return samples;
  std::vector<double> ys;
  ys.reserve(samples.size());
  for (const auto& s : samples) ys.push_back(s.second);
  auto median_of = [](std::vector<double>& v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
  };
  const double med = median_of(ys);
  for (double& y : ys) y = std::abs(y - med);
  const double spread = 3.0 * 1.4826 * median_of(ys);
  Samples out = samples;
  for (auto& s : out) s.second = std::clamp(s.second, med - spread, med + spread);
  return out;
}

/// Decides, once per step, whether the BVH is rebuilt or refit.
///
/// decide() must be called exactly once per step: with no sample before the
/// first step, then with the sample of the step that just finished. The first
/// step is always a rebuild since there is nothing to refit.
///
/// Gradient keeps exponential moving averages of refit and rebuild times and a
/// least-squares slope of query time against refits-since-rebuild over the
/// last W steps, then rebuilds once the refit count reaches k_u_opt of those
/// estimates.
class MaintenancePolicy {
 public:
  explicit MaintenancePolicy(PolicyConfig config = {}) : config_(std::move(config)) {
    if (const auto* g = std::get_if<GradientPolicy>(&config_.spec); g && g->window < 2) {
      throw ConfigError("window", "gradient window needs at least 2 samples");
    }
    if (const auto* f = std::get_if<FixedKPolicy>(&config_.spec); f && f->k == 0) {
      throw ConfigError("policy", "fixed period must be >= 1");
    }
    if (!(config_.ema_alpha > 0.0 && config_.ema_alpha <= 1.0)) {
      throw ConfigError("ema-alpha", "must be in (0, 1]");
    }
    k_u_current_ = config_.limits.k_max;
  }

  Maintenance decide(const std::optional<StepSample>& last) {
    if (last) observe(*last);
    const std::size_t current = step_++;
    if (current == 0) return Maintenance::Rebuild;

    if (std::holds_alternative<FixedKPolicy>(config_.spec)) {
      const std::size_t period = std::get<FixedKPolicy>(config_.spec).k;
      return current - last_rebuild_step_ >= period ? Maintenance::Rebuild : Maintenance::Update;
    }
    if (std::holds_alternative<AvgPolicy>(config_.spec)) {
      if (update_count_ == 0 || rebuild_count_ == 0) return Maintenance::Update;
      const double update_mean = update_cost_sum_ / static_cast<double>(update_count_);
      const double rebuild_mean = rebuild_cost_sum_ / static_cast<double>(rebuild_count_);
      return update_mean > rebuild_mean ? Maintenance::Rebuild : Maintenance::Update;
    }
    return updates_since_rebuild_ >= k_u_current_ ? Maintenance::Rebuild : Maintenance::Update;
  }

  const PolicyConfig& config() const noexcept { return config_; }
  /// Active refits-per-rebuild target (Gradient); FixedK reports K - 1.
  std::size_t k_u_current() const noexcept {
    if (const auto* f = std::get_if<FixedKPolicy>(&config_.spec)) return f->k - 1;
    return k_u_current_;
  }
  /// Steps between the last observed rebuild and the most recently decided step.
  std::size_t steps_since_rebuild() const noexcept { return step_ == 0 ? 0 : step_ - 1 - last_rebuild_step_; }
  std::size_t updates_since_rebuild() const noexcept { return updates_since_rebuild_; }
  std::optional<double> t_u_estimate() const noexcept { return t_u_; }
  std::optional<double> t_r_estimate() const noexcept { return t_r_; }
  std::optional<double> delta_q_estimate() const noexcept { return delta_q_; }

 private:
  void observe(const StepSample& s) {
    const std::size_t finished = step_ - 1;
    const double cost = s.maintain_s + s.query_s;
    if (s.rebuilt) {
      last_rebuild_step_ = finished;
      updates_since_rebuild_ = 0;
      t_r_ = ema(t_r_, s.maintain_s);
      rebuild_cost_sum_ += cost;
      ++rebuild_count_;
      update_cost_sum_ = 0.0;
      update_count_ = 0;
    } else {
      ++updates_since_rebuild_;
      t_u_ = ema(t_u_, s.maintain_s);
      update_cost_sum_ += cost;
      ++update_count_;
    }

    if (const auto* g = std::get_if<GradientPolicy>(&config_.spec)) {
      // The window spans rebuilds so short cycles still pool into a fresh
      // estimate; a per-cycle window would freeze the slope once cycles get
      // too short to refill it.
      window_.emplace_back(static_cast<double>(updates_since_rebuild_), s.query_s);
      while (window_.size() > g->window) window_.pop_front();
      if (window_.size() >= std::max<std::size_t>(2, config_.min_slope_samples)) {
        delta_q_ = least_squares_slope(winsorized(window_));
      }
      if (t_u_ && t_r_ && delta_q_) {
        k_u_current_ = k_u_opt(*t_u_, *t_r_, *delta_q_, config_.limits);
      } else {
        k_u_current_ = config_.limits.k_max;
      }
    }
  }

  std::optional<double> ema(std::optional<double> prev, double x) const noexcept {
    if (!prev) return x;
    return config_.ema_alpha * x + (1.0 - config_.ema_alpha) * *prev;
  }

  PolicyConfig config_;
  std::size_t step_ = 0;
  std::size_t last_rebuild_step_ = 0;
  std::size_t updates_since_rebuild_ = 0;
  std::size_t k_u_current_ = 0;

  std::optional<double> t_u_, t_r_, delta_q_;
  std::deque<std::pair<double, double>> window_;

  double update_cost_sum_ = 0.0;
  std::size_t update_count_ = 0;
  double rebuild_cost_sum_ = 0.0;
  std::size_t rebuild_count_ = 0;
};

}  // namespace orcs
