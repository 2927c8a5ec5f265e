#include "acid/experiment.hpp"

#include <cmath>
#include <limits>

#include "acid/error.hpp"
#include "acid/rng.hpp"

namespace acid {

Graph GraphSpec::build() const {
  if (kind == TopologyKind::custom) return build_custom_topology(n, edges, ratio);
  return build_topology(kind, n, ratio);
}

PairingMode parse_pairing_mode(std::string_view name) {
  if (name == "independent-poisson") return PairingMode::independent_poisson;
  if (name == "bipartite-matching") return PairingMode::bipartite_matching;
  fail(ErrorCode::invalid_argument, "unknown pairing mode '" + std::string(name) + "'");
}

std::string_view to_string(PairingMode mode) {
  return mode == PairingMode::independent_poisson ? "independent-poisson" : "bipartite-matching";
}

Regime parse_regime(std::string_view name) {
  if (name == "strongly-convex") return Regime::strongly_convex;
  if (name == "non-convex") return Regime::non_convex;
  fail(ErrorCode::invalid_argument, "unknown regime '" + std::string(name) + "'");
}

std::string_view to_string(Regime regime) {
  return regime == Regime::strongly_convex ? "strongly-convex" : "non-convex";
}

ResolvedExperiment resolve(const ExperimentConfig& cfg) {
  require(cfg.horizon > 0.0 && std::isfinite(cfg.horizon), "horizon must be positive",
          ErrorCode::invalid_config);
  require(cfg.sample_period > 0.0, "sample period must be positive", ErrorCode::invalid_config);
  require(cfg.comm_duration >= 0.0, "communication duration must be non-negative",
          ErrorCode::invalid_config);
  require(cfg.init_spread >= 0.0, "init spread must be non-negative", ErrorCode::invalid_config);

  Graph graph = cfg.graph.build();
  ObjectiveSpec ospec = cfg.objective;
  ospec.n = graph.node_count();
  ObjectiveEnsemble objective = ObjectiveEnsemble::from_spec(ospec);

  std::optional<SpectralReport> spectral;
  AcidParams params{0.0, 0.5, 0.5, 0.0};
  if (graph.node_count() >= 2) {
    spectral = spectral_report(graph);
    params = acid_params(spectral->chi1, spectral->chi2, cfg.accelerated);
  }
  const double bound =
      step_size_bound(objective.smoothness(), params.chi, cfg.regime, cfg.c_nonconvex);
  const double gamma = cfg.gamma.value_or(bound);
  require(gamma >= 0.0 && std::isfinite(gamma), "gamma must be non-negative",
          ErrorCode::invalid_config);
  if (!cfg.override_gamma && gamma > bound * (1.0 + 1e-12)) {
    fail(ErrorCode::invalid_config, "gamma " + std::to_string(gamma) +
                                        " exceeds the step-size bound " + std::to_string(bound) +
                                        " (use override_gamma to force)");
  }
  return {std::move(graph), std::move(objective), spectral, params, gamma, bound};
}

std::vector<WorkerState> initial_states(const ExperimentConfig& cfg, std::size_t n,
                                        std::size_t d) {
  const auto dim = static_cast<Eigen::Index>(d);
  std::vector<WorkerState> states(n, WorkerState::at(Eigen::VectorXd::Zero(dim)));
  if (cfg.init_spread > 0.0) {
    RandomStream rng(derive_seed(cfg.seed, kInitStream));
    for (auto& s : states) {
      for (Eigen::Index k = 0; k < dim; ++k) s.x(k) = cfg.init_spread * rng.normal();
      s.x_tilde = s.x;
    }
  }
  return states;
}

MetricSample measure(std::span<const WorkerState> states, const ObjectiveEnsemble& objective,
                     double t, std::uint64_t grad_events, std::uint64_t comm_events) {
  MetricSample m;
  m.t = t;
  const Eigen::VectorXd xbar = mean_x(states);
  m.consensus_sq = consensus_distance(states);
  m.loss_mean = objective.value(xbar);
  m.dist_opt_sq = objective.has_closed_form_optimum()
                      ? (xbar - objective.global_optimum()).squaredNorm()
                      : std::numeric_limits<double>::quiet_NaN();
  m.grad_norm_sq_mean = objective.grad(xbar).squaredNorm();
  m.grad_events = grad_events;
  m.comm_events = comm_events;
  return m;
}

std::vector<double> sample_times(double horizon, double period) {
  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * period;
    if (t > horizon * (1.0 + 1e-12)) break;
    times.push_back(std::min(t, horizon));
  }
  if (times.back() < horizon) times.push_back(horizon);
  return times;
}

}  // namespace acid
