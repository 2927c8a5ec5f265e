#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "acid/experiment.hpp"
#include "acid/rng.hpp"

namespace acid {

struct Event {
  enum class Kind { grad, comm };
  double t = 0.0;
  Kind kind = Kind::grad;
  std::size_t i = 0;
  std::size_t j = 0;  // comm only
};

/// Continuous-time replay of the gradient and communication Poisson
/// processes through the dynamics kernel.
///
/// Events come from one superposed stream of total rate n + sum(rates):
/// an exponential inter-arrival, then a categorical draw of the process.
/// Every worker owns its gradient-noise stream, so a run is a pure function
/// of the config.
class Simulation {
 public:
  explicit Simulation(const ExperimentConfig& cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const ResolvedExperiment& resolved() const { return res_; }
  const std::vector<WorkerState>& states() const { return states_; }
  double time() const { return t_; }
  std::uint64_t grad_events() const { return grad_events_; }
  std::uint64_t comm_events() const { return comm_events_; }
  std::uint64_t rejected_comm_events() const { return rejected_; }
  std::uint64_t event_index() const { return events_; }
  double total_rate() const { return total_rate_; }

  /// sum over applied gradient events of gamma * g.
  const Eigen::VectorXd& applied_gradient_sum() const { return grad_sum_; }

  /// Draws the next event; advances the simulation clock but not the state.
  Event next_event();

  /// Applies an event through the kernel. Returns false when the bipartite
  /// constraint rejects a communication. Throws ErrorCode::diverged on a
  /// non-finite coordinate.
  bool apply(const Event& e);

  /// All states mixed forward (read-only) to `t` >= every t_last.
  std::vector<WorkerState> snapshot(double t) const;
  MetricSample sample(double t) const;

  Trace run();

 private:
  ExperimentConfig cfg_;
  ResolvedExperiment res_;
  std::vector<WorkerState> states_;
  std::vector<RandomStream> noise_;
  RandomStream events_rng_;
  std::vector<double> cumulative_edge_rate_;
  std::vector<double> busy_until_;
  double total_rate_ = 0.0;
  double t_ = 0.0;
  std::uint64_t grad_events_ = 0;
  std::uint64_t comm_events_ = 0;
  std::uint64_t rejected_ = 0;
  std::uint64_t events_ = 0;
  Eigen::VectorXd grad_sum_;
};

Trace run_simulation(const ExperimentConfig& cfg);

/// Synchronous stand-in for All-Reduce SGD: at each unit time step every
/// worker computes a stochastic gradient at the common iterate and the
/// iterates are averaged exactly.
Trace run_sync_baseline(const ExperimentConfig& cfg);

}  // namespace acid
