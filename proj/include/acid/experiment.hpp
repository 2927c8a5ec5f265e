#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acid/dynamics.hpp"
#include "acid/graph.hpp"
#include "acid/metrics.hpp"
#include "acid/objective.hpp"

namespace acid {

struct GraphSpec {
  TopologyKind kind = TopologyKind::ring;
  std::size_t n = 16;
  double ratio = 1.0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // custom only

  Graph build() const;
};

enum class PairingMode { independent_poisson, bipartite_matching };

PairingMode parse_pairing_mode(std::string_view name);
std::string_view to_string(PairingMode mode);
Regime parse_regime(std::string_view name);
std::string_view to_string(Regime regime);

struct ExperimentConfig {
  GraphSpec graph;
  ObjectiveSpec objective;  // objective.n is forced to graph.n on resolve
  double horizon = 100.0;
  std::optional<double> gamma;  // nullopt resolves to the step-size bound
  bool accelerated = true;
  Regime regime = Regime::strongly_convex;
  double c_nonconvex = kDefaultNonConvexConstant;
  std::uint64_t seed = 0;
  double sample_period = 1.0;
  PairingMode pairing = PairingMode::bipartite_matching;
  double comm_duration = 0.0;  // artificial busy time of a communication
  bool override_gamma = false;
  double init_spread = 0.0;  // > 0 draws x_i = x_tilde_i ~ N(0, spread^2 I)
};

/// Everything derived from a config before a run starts.
struct ResolvedExperiment {
  Graph graph;
  ObjectiveEnsemble objective;
  std::optional<SpectralReport> spectral;  // absent for a single worker
  AcidParams params;
  double gamma = 0.0;
  double gamma_bound = 0.0;
};

ResolvedExperiment resolve(const ExperimentConfig& cfg);

/// Initial worker states: consensus at the origin unless init_spread > 0.
std::vector<WorkerState> initial_states(const ExperimentConfig& cfg, std::size_t n,
                                        std::size_t d);

/// Per-worker timing of a concurrent run.
struct WorkerTiming {
  std::uint64_t grad_events = 0;
  std::uint64_t comm_events = 0;
  double mean_grad_duration_s = 0.0;
  double mean_comm_duration_s = 0.0;
};

struct TimingReport {
  double wall_seconds = 0.0;
  double unit_time_seconds = 0.0;  // final running-average gradient duration
  double measured_ratio = 0.0;     // mean over workers of comms / grads
  double tracker_gap = 0.0;        // |xbar - xtilde_bar| / (1 + |xbar|) before averaging
  double ledger_rel_error = 0.0;   // sum conservation error against sum gamma g
  std::vector<WorkerTiming> workers;
};

struct Trace {
  std::string mode;  // simulate | baseline | runtime
  ExperimentConfig config;
  double gamma = 0.0;
  double gamma_bound = 0.0;
  AcidParams params;
  std::optional<SpectralReport> spectral;
  std::vector<MetricSample> samples;
  std::vector<WorkerState> final_states;
  std::uint64_t events = 0;
  std::uint64_t rejected_comm_events = 0;
  std::optional<TimingReport> timing;
};

/// Metrics of a snapshot whose states all share the time `t`.
MetricSample measure(std::span<const WorkerState> states, const ObjectiveEnsemble& objective,
                     double t, std::uint64_t grad_events, std::uint64_t comm_events);

/// Sample times 0, p, 2p, ... up to the horizon, with the horizon appended.
std::vector<double> sample_times(double horizon, double period);

}  // namespace acid
