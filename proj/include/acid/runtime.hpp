#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "acid/experiment.hpp"
#include "acid/rng.hpp"

namespace acid {

enum class RatioControl { barrier, exponential_wait };
enum class DurationDistribution { constant, exponential, uniform };

RatioControl parse_ratio_control(std::string_view name);
std::string_view to_string(RatioControl control);
DurationDistribution parse_duration_distribution(std::string_view name);
std::string_view to_string(DurationDistribution dist);

struct RuntimeConfig {
  ExperimentConfig experiment;
  RatioControl control = RatioControl::exponential_wait;
  std::optional<double> target_ratio;  // communications per gradient per worker
  DurationDistribution duration_dist = DurationDistribution::constant;
  double grad_duration_s = 5e-4;      // mean emulated gradient compute time
  double rendezvous_timeout_s = 10.0;  // waiting longer for a partner is a deadlock
};

/// Exponentially weighted running mean of gradient durations (decay 0.9).
class DurationAverager {
 public:
  static constexpr double kDecay = 0.9;

  void add(double duration);
  bool empty() const { return count_ == 0; }
  std::uint64_t count() const { return count_; }
  /// Throws if no duration has been recorded yet.
  double mean() const;
  /// Wall-clock gap expressed in units of the running mean.
  double to_unit_time(double wall_gap) const { return wall_gap / mean(); }

 private:
  double mean_ = 0.0;
  std::uint64_t count_ = 0;
};

/// Monotone clock in unit time shared by every activity. Each reading
/// integrates the wall-clock gap since the previous one at the current
/// seconds-per-unit scale, so rescaling never moves time backwards.
class UnitClock {
 public:
  explicit UnitClock(double seconds_per_unit);

  double now();
  void set_seconds_per_unit(double seconds);
  double seconds_per_unit() const;

 private:
  mutable std::mutex mutex_;
  std::chrono::steady_clock::time_point last_;
  double unit_s_;
  double t_ = 0.0;
};

/// Pseudo-random pair schedule that every worker can reproduce from a
/// shared seed. Pairs are drawn among edges whose endpoints are both
/// available, with probability proportional to the edge rate.
/// Internally synchronized.
class Matchmaker {
 public:
  Matchmaker(const Graph& graph, std::uint64_t seed);

  std::optional<std::pair<std::size_t, std::size_t>> next_pair(const std::vector<bool>& available);

 private:
  std::mutex mutex_;
  std::vector<Edge> edges_;
  std::size_t n_;
  RandomStream rng_;
};

/// Runs the two activities of every worker on real threads for
/// experiment.horizon units of normalized time, then applies one exact
/// averaging of all workers.
Trace run_concurrent(const RuntimeConfig& cfg);

}  // namespace acid
