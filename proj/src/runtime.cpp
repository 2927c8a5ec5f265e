#include "acid/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <memory>
#include <string>
#include <thread>

#include "acid/error.hpp"

namespace acid {

RatioControl parse_ratio_control(std::string_view name) {
  if (name == "barrier") return RatioControl::barrier;
  if (name == "exponential-wait") return RatioControl::exponential_wait;
  fail(ErrorCode::invalid_argument, "unknown ratio control '" + std::string(name) + "'");
}

std::string_view to_string(RatioControl control) {
  return control == RatioControl::barrier ? "barrier" : "exponential-wait";
}

DurationDistribution parse_duration_distribution(std::string_view name) {
  if (name == "constant") return DurationDistribution::constant;
  if (name == "exponential") return DurationDistribution::exponential;
  if (name == "uniform") return DurationDistribution::uniform;
  fail(ErrorCode::invalid_argument, "unknown duration distribution '" + std::string(name) + "'");
}

std::string_view to_string(DurationDistribution dist) {
  switch (dist) {
    case DurationDistribution::constant: return "constant";
    case DurationDistribution::exponential: return "exponential";
    case DurationDistribution::uniform: return "uniform";
  }
  return "?";
}

void DurationAverager::add(double duration) {
  mean_ = count_ == 0 ? duration : kDecay * mean_ + (1.0 - kDecay) * duration;
  ++count_;
}

double DurationAverager::mean() const {
  require(count_ > 0, "no gradient duration recorded yet");
  return mean_;
}

UnitClock::UnitClock(double seconds_per_unit)
    : last_(std::chrono::steady_clock::now()), unit_s_(seconds_per_unit) {
  require(seconds_per_unit > 0.0, "unit duration must be positive");
}

double UnitClock::now() {
  std::lock_guard lock(mutex_);
  const auto wall = std::chrono::steady_clock::now();
  t_ += std::chrono::duration<double>(wall - last_).count() / unit_s_;
  last_ = wall;
  return t_;
}

void UnitClock::set_seconds_per_unit(double seconds) {
  require(seconds > 0.0, "unit duration must be positive");
  std::lock_guard lock(mutex_);
  const auto wall = std::chrono::steady_clock::now();
  t_ += std::chrono::duration<double>(wall - last_).count() / unit_s_;
  last_ = wall;
  unit_s_ = seconds;
}

double UnitClock::seconds_per_unit() const {
  std::lock_guard lock(mutex_);
  return unit_s_;
}

Matchmaker::Matchmaker(const Graph& graph, std::uint64_t seed)
    : edges_(graph.edges()), n_(graph.node_count()), rng_(derive_seed(seed, kMatchmakerStream)) {}

std::optional<std::pair<std::size_t, std::size_t>> Matchmaker::next_pair(
    const std::vector<bool>& available) {
  require(available.size() == n_, "availability set has the wrong size");
  std::lock_guard lock(mutex_);
  double total = 0.0;
  for (const auto& e : edges_) {
    if (available[e.i] && available[e.j]) total += e.rate;
  }
  if (total <= 0.0) return std::nullopt;
  double u = rng_.uniform() * total;
  const Edge* chosen = nullptr;
  for (const auto& e : edges_) {
    if (!(available[e.i] && available[e.j])) continue;
    chosen = &e;
    u -= e.rate;
    if (u < 0.0) break;
  }
  return std::pair{chosen->i, chosen->j};
}

namespace {

using Steady = std::chrono::steady_clock;

double seconds_since(Steady::time_point start) {
  return std::chrono::duration<double>(Steady::now() - start).count();
}

void sleep_seconds(double s) {
  if (s > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

struct Worker {
  std::mutex state_mutex;
  WorkerState state;
  Eigen::VectorXd ledger;  // sum of gamma * g applied to this worker

  RandomStream noise;
  RandomStream durations;
  RandomStream waits;

  std::mutex count_mutex;
  std::condition_variable count_cv;
  std::atomic<std::uint64_t> grads{0};
  std::atomic<std::uint64_t> comms{0};
  double grad_seconds = 0.0;  // compute thread only
  double comm_seconds = 0.0;  // guarded by state_mutex
};

// Blocking pairwise rendezvous. A worker offers itself, the matchmaker
// pairs available workers, and the lower index of each pair runs the
// exchange while the other waits for it.
class Rendezvous {
 public:
  Rendezvous(std::size_t n, Matchmaker& matchmaker)
      : available_(n, false), partner_(n), done_(n, false), matchmaker_(matchmaker) {}

  std::optional<std::size_t> offer(std::size_t i, double timeout_s) {
    std::unique_lock lock(mutex_);
    available_[i] = true;
    while (auto pair = matchmaker_.next_pair(available_)) {
      auto [a, b] = *pair;
      available_[a] = available_[b] = false;
      partner_[a] = b;
      partner_[b] = a;
    }
    cv_.notify_all();
    const bool ready = cv_.wait_for(lock, std::chrono::duration<double>(timeout_s),
                                    [&] { return partner_[i].has_value() || stopped_; });
    if (auto p = partner_[i]) {
      partner_[i].reset();
      return p;
    }
    available_[i] = false;
    if (!ready && !stopped_) {
      fail(ErrorCode::deadlock, "worker " + std::to_string(i) + " waited " +
                                    std::to_string(timeout_s) + " s for a partner");
    }
    return std::nullopt;
  }

  void complete(std::size_t follower) {
    std::lock_guard lock(mutex_);
    done_[follower] = true;
    cv_.notify_all();
  }

  void wait_done(std::size_t follower) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return done_[follower] || aborted_; });
    done_[follower] = false;
  }

  void stop(bool abort) {
    std::lock_guard lock(mutex_);
    stopped_ = true;
    aborted_ = aborted_ || abort;
    cv_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::vector<bool> available_;
  std::vector<std::optional<std::size_t>> partner_;
  std::vector<bool> done_;
  bool stopped_ = false;
  bool aborted_ = false;
  Matchmaker& matchmaker_;
};

class ConcurrentRun {
 public:
  explicit ConcurrentRun(const RuntimeConfig& cfg)
      : cfg_(cfg),
        res_(resolve(cfg.experiment)),
        ratio_(cfg.target_ratio.value_or(cfg.experiment.graph.ratio)),
        clock_(cfg.grad_duration_s),
        matchmaker_(res_.graph, cfg.experiment.seed),
        rendezvous_(res_.graph.node_count(), matchmaker_) {
    require(ratio_ > 0.0, "target ratio must be positive", ErrorCode::invalid_config);
    require(cfg.grad_duration_s > 0.0, "gradient duration must be positive",
            ErrorCode::invalid_config);
    require(cfg.rendezvous_timeout_s > 0.0, "rendezvous timeout must be positive",
            ErrorCode::invalid_config);
    const auto n = res_.graph.node_count();
    const auto d = res_.objective.dim();
    auto init = initial_states(cfg.experiment, n, d);
    const std::uint64_t seed = cfg.experiment.seed;
    for (std::size_t i = 0; i < n; ++i) {
      auto w = std::make_unique<Worker>();
      w->state = init[i];
      w->ledger = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
      w->noise = RandomStream(derive_seed(seed, kWorkerStreamBase + i));
      w->durations = RandomStream(derive_seed(seed, kDurationStream * 7919 + i));
      w->waits = RandomStream(derive_seed(seed, kDurationStream * 104729 + i));
      workers_.push_back(std::move(w));
    }
    next_ticket_.assign(n, 0.0);
    initial_sum_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (const auto& s : init) initial_sum_ += s.x;
  }

  Trace run() {
    Trace trace;
    trace.mode = "runtime";
    trace.config = cfg_.experiment;
    trace.config.objective.n = res_.graph.node_count();
    trace.gamma = res_.gamma;
    trace.gamma_bound = res_.gamma_bound;
    trace.params = res_.params;
    trace.spectral = res_.spectral;

    const auto n = workers_.size();
    const double horizon = cfg_.experiment.horizon;
    const auto wall_start = Steady::now();
    clock_.now();

    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < n; ++i) {
      threads.emplace_back([this, i] { guarded([&] { compute_loop(i); }); });
      if (res_.graph.degree(i) > 0) {
        threads.emplace_back([this, i] { guarded([&] { communicate_loop(i); }); });
      }
    }

    const auto times = sample_times(horizon, cfg_.experiment.sample_period);
    for (std::size_t k = 0; k + 1 < times.size() && !failed_.load(); ++k) {
      wait_until(times[k]);
      if (failed_.load()) break;
      take_sample(trace, horizon);
    }
    wait_until(horizon);
    stop_.store(true);
    rendezvous_.stop(failed_.load());
    for (auto& w : workers_) {
      std::lock_guard lock(w->count_mutex);
      w->count_cv.notify_all();
    }
    for (auto& t : threads) t.join();
    if (error_) std::rethrow_exception(error_);

    // Every applied event happened at t <= horizon, so all states can be
    // mixed forward to exactly the horizon.
    std::vector<WorkerState> final_states;
    for (auto& w : workers_) final_states.push_back(mixed_forward(w->state, res_.params.eta, horizon));
    trace.samples.push_back(measure(final_states, res_.objective, horizon, total_grads(), total_comms()));

    TimingReport timing;
    timing.wall_seconds = seconds_since(wall_start);
    timing.unit_time_seconds = clock_.seconds_per_unit();
    const Eigen::VectorXd xbar = mean_x(final_states);
    const Eigen::VectorXd xtbar = mean_x_tilde(final_states);
    timing.tracker_gap = (xbar - xtbar).norm() / (1.0 + xbar.norm());

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(xbar.size());
    Eigen::VectorXd ledger = Eigen::VectorXd::Zero(xbar.size());
    for (std::size_t i = 0; i < n; ++i) {
      sum += final_states[i].x;
      ledger += workers_[i]->ledger;
    }
    timing.ledger_rel_error = (sum - (initial_sum_ - ledger)).norm() /
                              (1.0 + initial_sum_.norm() + ledger.norm());
    double ratio_total = 0.0;
    for (auto& w : workers_) {
      WorkerTiming wt;
      wt.grad_events = w->grads.load();
      wt.comm_events = w->comms.load();
      wt.mean_grad_duration_s = wt.grad_events ? w->grad_seconds / static_cast<double>(wt.grad_events) : 0.0;
      wt.mean_comm_duration_s = wt.comm_events ? w->comm_seconds / static_cast<double>(wt.comm_events) : 0.0;
      ratio_total += wt.grad_events ? static_cast<double>(wt.comm_events) / static_cast<double>(wt.grad_events) : 0.0;
      timing.workers.push_back(wt);
    }
    timing.measured_ratio = ratio_total / static_cast<double>(n);

    // Closing All-Reduce.
    for (auto& s : final_states) {
      s.x = xbar;
      s.x_tilde = xtbar;
    }
    trace.final_states = std::move(final_states);
    trace.events = total_grads() + pair_events_.load();
    trace.timing = std::move(timing);
    return trace;
  }

 private:
  template <class F>
  void guarded(F&& body) {
    try {
      body();
    } catch (...) {
      {
        std::lock_guard lock(error_mutex_);
        if (!error_) error_ = std::current_exception();
      }
      failed_.store(true);
      stop_.store(true);
      rendezvous_.stop(true);
    }
  }

  std::uint64_t total_grads() const {
    std::uint64_t total = 0;
    for (const auto& w : workers_) total += w->grads.load();
    return total;
  }

  std::uint64_t total_comms() const { return pair_events_.load(); }

  void wait_until(double t_unit) {
    for (;;) {
      const double now = clock_.now();
      if (now >= t_unit || failed_.load()) return;
      sleep_seconds(std::min((t_unit - now) * clock_.seconds_per_unit(), 2e-3));
    }
  }

  void take_sample(Trace& trace, double horizon) {
    std::vector<std::unique_lock<std::mutex>> locks;
    for (auto& w : workers_) locks.emplace_back(w->state_mutex);
    const double t = clock_.now();
    if (t >= horizon) return;
    if (!trace.samples.empty() && t <= trace.samples.back().t) return;
    std::vector<WorkerState> snap;
    for (auto& w : workers_) snap.push_back(mixed_forward(w->state, res_.params.eta, t));
    trace.samples.push_back(measure(snap, res_.objective, t, total_grads(), total_comms()));
  }

  double draw_duration(Worker& w) {
    const double mean = cfg_.grad_duration_s;
    switch (cfg_.duration_dist) {
      case DurationDistribution::constant: return mean;
      case DurationDistribution::exponential: return w.durations.exponential(1.0 / mean);
      case DurationDistribution::uniform: return 2.0 * mean * w.durations.uniform();
    }
    return mean;
  }

  void record_duration(double seconds) {
    std::lock_guard lock(averager_mutex_);
    averager_.add(seconds);
    clock_.set_seconds_per_unit(averager_.mean());
  }

  void compute_loop(std::size_t i) {
    Worker& w = *workers_[i];
    const double horizon = cfg_.experiment.horizon;
    while (!stop_.load()) {
      if (cfg_.control == RatioControl::barrier && res_.graph.degree(i) > 0) {
        std::unique_lock lock(w.count_mutex);
        w.count_cv.wait_for(lock, std::chrono::milliseconds(5), [&] {
          return stop_.load() ||
                 ratio_ * static_cast<double>(w.grads.load()) <= static_cast<double>(w.comms.load()) + ratio_;
        });
        if (!(ratio_ * static_cast<double>(w.grads.load()) <= static_cast<double>(w.comms.load()) + ratio_))
          continue;
      }
      if (stop_.load()) break;

      Eigen::VectorXd x;
      {
        std::lock_guard lock(w.state_mutex);
        x = w.state.x;
      }
      const auto start = Steady::now();
      const Eigen::VectorXd g = res_.objective.local_stoch_grad(i, x, w.noise);
      sleep_seconds(draw_duration(w));
      const double spent = seconds_since(start);
      record_duration(spent);
      w.grad_seconds += spent;

      {
        std::lock_guard lock(w.state_mutex);
        const double t = clock_.now();
        if (t > horizon) break;
        momentum_mix(w.state, res_.params.eta, t);
        grad_step(w.state, g, res_.gamma);
        w.ledger.noalias() += res_.gamma * g;
        if (!w.state.x.allFinite() || !w.state.x_tilde.allFinite()) {
          fail(ErrorCode::diverged, "worker " + std::to_string(i) + " diverged at t=" + std::to_string(t));
        }
      }
      {
        std::lock_guard lock(w.count_mutex);
        w.grads.fetch_add(1);
        w.count_cv.notify_all();
      }
    }
  }

  bool wait_for_turn(std::size_t i) {
    Worker& w = *workers_[i];
    if (cfg_.control == RatioControl::barrier) {
      std::unique_lock lock(w.count_mutex);
      while (!stop_.load()) {
        if (static_cast<double>(w.comms.load()) < ratio_ * static_cast<double>(w.grads.load() + 1))
          return true;
        w.count_cv.wait_for(lock, std::chrono::milliseconds(5));
      }
      return false;
    }
    while (!stop_.load()) {
      const double now = clock_.now();
      if (now >= next_ticket_[i]) return true;
      sleep_seconds(std::min((next_ticket_[i] - now) * clock_.seconds_per_unit(), 2e-3));
    }
    return false;
  }

  void communicate_loop(std::size_t i) {
    Worker& w = *workers_[i];
    next_ticket_[i] = w.waits.exponential(ratio_);
    const double horizon = cfg_.experiment.horizon;
    while (!stop_.load()) {
      if (!wait_for_turn(i)) break;
      const auto partner = rendezvous_.offer(i, cfg_.rendezvous_timeout_s);
      if (!partner) break;
      const std::size_t j = *partner;
      if (i < j) {
        exchange(i, j, horizon);
        rendezvous_.complete(j);
      } else {
        rendezvous_.wait_done(i);
      }
      next_ticket_[i] += w.waits.exponential(ratio_);
    }
  }

  void exchange(std::size_t i, std::size_t j, double horizon) {
    Worker& a = *workers_[i];
    Worker& b = *workers_[j];
    const auto start = Steady::now();
    bool applied = false;
    {
      std::scoped_lock lock(a.state_mutex, b.state_mutex);
      const double t = clock_.now();
      if (t <= horizon) {
        momentum_mix(a.state, res_.params.eta, t);
        momentum_mix(b.state, res_.params.eta, t);
        pairwise_average(a.state, b.state, res_.params);
        applied = true;
        const double spent = seconds_since(start);
        a.comm_seconds += spent;
        b.comm_seconds += spent;
      }
    }
    if (!applied) return;
    pair_events_.fetch_add(1);
    for (Worker* w : {&a, &b}) {
      std::lock_guard lock(w->count_mutex);
      w->comms.fetch_add(1);
      w->count_cv.notify_all();
    }
  }

  RuntimeConfig cfg_;
  ResolvedExperiment res_;
  double ratio_;
  UnitClock clock_;
  Matchmaker matchmaker_;
  Rendezvous rendezvous_;
  std::vector<std::unique_ptr<Worker>> workers_;
  Eigen::VectorXd initial_sum_;

  std::mutex averager_mutex_;
  DurationAverager averager_;
  std::vector<double> next_ticket_;  // slot i is owned by worker i's communication thread

  std::atomic<bool> stop_{false};
  std::atomic<bool> failed_{false};
  std::atomic<std::uint64_t> pair_events_{0};
  std::mutex error_mutex_;
  std::exception_ptr error_;
};

}  // namespace

Trace run_concurrent(const RuntimeConfig& cfg) { return ConcurrentRun(cfg).run(); }

}  // namespace acid
