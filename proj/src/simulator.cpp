#include "acid/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "acid/error.hpp"

namespace acid {

namespace {

void check_finite(const WorkerState& s, std::uint64_t event_index, double t) {
  if (!s.x.allFinite() || !s.x_tilde.allFinite()) {
    fail(ErrorCode::diverged, "state diverged at event " + std::to_string(event_index) +
                                  " (t=" + std::to_string(t) + ")");
  }
}

std::vector<RandomStream> worker_streams(std::uint64_t seed, std::size_t n) {
  std::vector<RandomStream> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.emplace_back(derive_seed(seed, kWorkerStreamBase + i));
  return streams;
}

Trace make_trace(const char* mode, const ExperimentConfig& cfg, const ResolvedExperiment& res) {
  Trace trace;
  trace.mode = mode;
  trace.config = cfg;
  trace.config.objective.n = res.graph.node_count();
  trace.gamma = res.gamma;
  trace.gamma_bound = res.gamma_bound;
  trace.params = res.params;
  trace.spectral = res.spectral;
  return trace;
}

}  // namespace

Simulation::Simulation(const ExperimentConfig& cfg)
    : cfg_(cfg),
      res_(resolve(cfg)),
      events_rng_(derive_seed(cfg.seed, kEventStream)) {
  const auto n = res_.graph.node_count();
  const auto d = res_.objective.dim();
  states_ = initial_states(cfg_, n, d);
  noise_ = worker_streams(cfg_.seed, n);
  busy_until_.assign(n, 0.0);
  double acc = 0.0;
  for (const auto& e : res_.graph.edges()) {
    acc += e.rate;
    cumulative_edge_rate_.push_back(acc);
  }
  total_rate_ = static_cast<double>(n) + acc;
  grad_sum_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
}

Event Simulation::next_event() {
  t_ += events_rng_.exponential(total_rate_);
  Event e;
  e.t = t_;
  const double n = static_cast<double>(states_.size());
  const double u = events_rng_.uniform() * total_rate_;
  if (u < n || cumulative_edge_rate_.empty()) {
    e.kind = Event::Kind::grad;
    e.i = std::min(static_cast<std::size_t>(u), states_.size() - 1);
  } else {
    auto it = std::upper_bound(cumulative_edge_rate_.begin(), cumulative_edge_rate_.end(), u - n);
    if (it == cumulative_edge_rate_.end()) --it;
    const auto& edge = res_.graph.edges()[static_cast<std::size_t>(it - cumulative_edge_rate_.begin())];
    e.kind = Event::Kind::comm;
    e.i = edge.i;
    e.j = edge.j;
  }
  return e;
}

bool Simulation::apply(const Event& e) {
  ++events_;
  const double eta = res_.params.eta;
  if (e.kind == Event::Kind::grad) {
    auto& s = states_[e.i];
    momentum_mix(s, eta, e.t);
    const Eigen::VectorXd g = res_.objective.local_stoch_grad(e.i, s.x, noise_[e.i]);
    grad_step(s, g, res_.gamma);
    grad_sum_.noalias() += res_.gamma * g;
    ++grad_events_;
    check_finite(s, events_, e.t);
    return true;
  }
  if (cfg_.pairing == PairingMode::bipartite_matching &&
      (busy_until_[e.i] > e.t || busy_until_[e.j] > e.t)) {
    ++rejected_;
    return false;
  }
  auto& si = states_[e.i];
  auto& sj = states_[e.j];
  momentum_mix(si, eta, e.t);
  momentum_mix(sj, eta, e.t);
  pairwise_average(si, sj, res_.params);
  busy_until_[e.i] = busy_until_[e.j] = e.t + cfg_.comm_duration;
  ++comm_events_;
  check_finite(si, events_, e.t);
  check_finite(sj, events_, e.t);
  return true;
}

std::vector<WorkerState> Simulation::snapshot(double t) const {
  std::vector<WorkerState> out;
  out.reserve(states_.size());
  for (const auto& s : states_) out.push_back(mixed_forward(s, res_.params.eta, t));
  return out;
}

MetricSample Simulation::sample(double t) const {
  const auto snap = snapshot(t);
  return measure(snap, res_.objective, t, grad_events_, comm_events_);
}

Trace Simulation::run() {
  Trace trace = make_trace("simulate", cfg_, res_);
  const auto times = sample_times(cfg_.horizon, cfg_.sample_period);
  std::size_t next_sample = 0;
  for (;;) {
    const Event e = next_event();
    while (next_sample < times.size() && times[next_sample] < e.t) {
      trace.samples.push_back(sample(times[next_sample]));
      ++next_sample;
    }
    if (e.t > cfg_.horizon) break;
    apply(e);
  }
  trace.final_states = snapshot(cfg_.horizon);
  trace.events = events_;
  trace.rejected_comm_events = rejected_;
  return trace;
}

Trace run_simulation(const ExperimentConfig& cfg) { return Simulation(cfg).run(); }

Trace run_sync_baseline(const ExperimentConfig& cfg) {
  const ResolvedExperiment res = resolve(cfg);
  Trace trace = make_trace("baseline", cfg, res);
  const auto n = res.graph.node_count();
  const auto d = res.objective.dim();
  auto noise = worker_streams(cfg.seed, n);

  std::vector<WorkerState> states = initial_states(cfg, n, d);
  // The baseline starts from the exact average, as after an initial All-Reduce.
  Eigen::VectorXd x = mean_x(states);
  const auto set_all = [&](double t) {
    for (auto& s : states) {
      s.x = x;
      s.x_tilde = x;
      s.t_last = t;
    }
  };
  set_all(0.0);

  std::uint64_t grad_events = 0;
  std::uint64_t step = 0;
  std::uint64_t events = 0;
  for (double t : sample_times(cfg.horizon, cfg.sample_period)) {
    while (static_cast<double>(step + 1) <= t * (1.0 + 1e-12)) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.size());
      for (std::size_t i = 0; i < n; ++i) sum += res.objective.local_stoch_grad(i, x, noise[i]);
      x.noalias() -= res.gamma * (sum / static_cast<double>(n));
      ++step;
      grad_events += n;
      ++events;
      if (!x.allFinite()) {
        fail(ErrorCode::diverged, "state diverged at step " + std::to_string(step));
      }
    }
    set_all(t);
    // Every worker holds x itself, so measure on one copy: no rounding in the mean.
    trace.samples.push_back(measure(std::span(states).first(1), res.objective, t, grad_events, 0));
  }
  trace.final_states = states;
  trace.events = events;
  return trace;
}

}  // namespace acid
