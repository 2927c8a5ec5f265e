#include <gtest/gtest.h>

#include <cmath>

#include "acid/error.hpp"
#include "acid/simulator.hpp"
#include "oracles.hpp"

using namespace acid;

namespace {

ExperimentConfig ring_config(std::size_t n, double horizon, std::uint64_t seed = 0) {
  ExperimentConfig cfg;
  cfg.graph = {TopologyKind::ring, n, 1.0, {}};
  cfg.objective = {ObjectiveKind::quadratic, n, 3, 0.5, 2.0, 0.0, 1.0, 0.2, 5};
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

ExperimentConfig single_worker(double horizon) {
  ExperimentConfig cfg = ring_config(1, horizon, 3);
  cfg.graph = {TopologyKind::custom, 1, 1.0, {}};
  cfg.objective.zeta = 0.0;
  return cfg;
}

}  // namespace

TEST(NextEvent, TwoNodeProbabilities) {
  ExperimentConfig cfg = ring_config(2, 10.0);
  cfg.graph = {TopologyKind::custom, 2, 1.0, {{0, 1}}};
  Simulation sim(cfg);
  EXPECT_DOUBLE_EQ(sim.total_rate(), 3.0);
  const int draws = 100000;
  int grads = 0;
  double last = 0.0;
  for (int k = 0; k < draws; ++k) {
    const Event e = sim.next_event();
    EXPECT_GT(e.t, last);
    last = e.t;
    if (e.kind == Event::Kind::grad) {
      ++grads;
      EXPECT_LT(e.i, 2u);
    } else {
      EXPECT_EQ(e.i, 0u);
      EXPECT_EQ(e.j, 1u);
    }
  }
  const double p = 2.0 / 3.0;
  EXPECT_NEAR(grads / double(draws), p, 4 * std::sqrt(p * (1 - p) / draws));
  // Mean inter-arrival 1/R.
  EXPECT_NEAR(last / draws, 1.0 / 3.0, 4.0 / 3.0 / std::sqrt(draws));
}

TEST(NextEvent, DeterministicSequence) {
  Simulation a(ring_config(8, 10.0, 4)), b(ring_config(8, 10.0, 4));
  for (int k = 0; k < 1000; ++k) {
    const Event x = a.next_event(), y = b.next_event();
    EXPECT_EQ(x.t, y.t);
    EXPECT_EQ(x.kind, y.kind);
    EXPECT_EQ(x.i, y.i);
    EXPECT_EQ(x.j, y.j);
  }
}

TEST(NextEvent, CountsFollowPoissonLaw) {
  const std::size_t n = 16;
  const double T = 100.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Trace tr = run_simulation(ring_config(n, T, seed));
    const auto& last = tr.samples.back();
    const double grads = static_cast<double>(last.grad_events);
    const double comms = static_cast<double>(last.comm_events);
    EXPECT_NEAR(grads, n * T, 3 * std::sqrt(n * T));
    const double mean_comm = tr.spectral->trace_lambda / 2 * T;
    EXPECT_NEAR(comms, mean_comm, 3 * std::sqrt(mean_comm));
  }
}

TEST(Run, ConvergesWithoutNoiseOrHeterogeneity) {
  ExperimentConfig cfg;
  cfg.graph = {TopologyKind::complete, 4, 1.0, {}};
  cfg.objective = {ObjectiveKind::quadratic, 4, 2, 1.0, 1.0, 0.0, 0.0, 0.0, 1};
  cfg.horizon = 600.0;
  cfg.sample_period = 10.0;
  const Trace tr = run_simulation(cfg);
  const auto& last = tr.samples.back();
  EXPECT_LE(std::sqrt(last.dist_opt_sq), 1e-6);
  // Gradient flow on f contracts |xbar - x*| by exp(-mu gamma t); the
  // Poisson version is close to it.
  const double flow = std::sqrt(tr.samples.front().dist_opt_sq) * std::exp(-tr.gamma * cfg.horizon);
  EXPECT_LT(std::abs(std::log(std::sqrt(last.dist_opt_sq) / flow)), 0.25 * tr.gamma * cfg.horizon);
}

TEST(Run, ZeroStepKeepsMeanFixed) {
  for (bool acc : {true, false}) {
    ExperimentConfig cfg = ring_config(10, 30.0, 2);
    cfg.gamma = 0.0;
    cfg.accelerated = acc;
    cfg.init_spread = 1.0;
    Simulation sim(cfg);
    const Eigen::VectorXd x0 = mean_x(sim.states());
    const Trace tr = sim.run();
    EXPECT_LE((mean_x(tr.final_states) - x0).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT(tr.samples.back().consensus_sq, tr.samples.front().consensus_sq);
  }
}

TEST(Run, BitIdenticalTraces) {
  const Trace a = run_simulation(ring_config(8, 40.0, 11));
  const Trace b = run_simulation(ring_config(8, 40.0, 11));
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_EQ(a.samples[k].consensus_sq, b.samples[k].consensus_sq);
    EXPECT_EQ(a.samples[k].loss_mean, b.samples[k].loss_mean);
    EXPECT_EQ(a.samples[k].grad_events, b.samples[k].grad_events);
  }
  for (std::size_t i = 0; i < a.final_states.size(); ++i) {
    EXPECT_EQ(a.final_states[i].x, b.final_states[i].x);
    EXPECT_EQ(a.final_states[i].x_tilde, b.final_states[i].x_tilde);
  }
  const Trace c = run_simulation(ring_config(8, 40.0, 12));
  EXPECT_NE(a.samples.back().loss_mean, c.samples.back().loss_mean);
}

TEST(Run, TraceShape) {
  ExperimentConfig cfg = ring_config(6, 10.0);
  cfg.sample_period = 0.3;
  const Trace tr = run_simulation(cfg);
  ASSERT_GE(tr.samples.size(), 2u);
  EXPECT_EQ(tr.samples.front().t, 0.0);
  EXPECT_EQ(tr.samples.back().t, 10.0);
  for (std::size_t k = 1; k < tr.samples.size(); ++k) {
    EXPECT_GT(tr.samples[k].t, tr.samples[k - 1].t);
    EXPECT_GE(tr.samples[k].grad_events, tr.samples[k - 1].grad_events);
    EXPECT_GE(tr.samples[k].comm_events, tr.samples[k - 1].comm_events);
    EXPECT_GE(tr.samples[k].consensus_sq, 0.0);
  }
  EXPECT_EQ(tr.final_states.size(), 6u);
  for (const auto& s : tr.final_states) EXPECT_EQ(s.t_last, 10.0);
}

TEST(Run, MeanTrackerAndDriftAtEveryEvent) {
  ExperimentConfig cfg = ring_config(16, 1e9, 6);
  cfg.init_spread = 0.0;
  Simulation sim(cfg);
  const double n = 16.0;
  Eigen::VectorXd expected = mean_x(sim.states());
  for (int k = 0; k < 20000; ++k) {
    const Event e = sim.next_event();
    sim.apply(e);
    if (k % 50 != 0) continue;
    const auto snap = sim.snapshot(e.t);
    const Eigen::VectorXd xbar = mean_x(snap);
    EXPECT_LE((xbar - mean_x_tilde(snap)).norm(), 1e-9 * (1 + xbar.norm()));
  }
  expected -= sim.applied_gradient_sum() / n;
  const auto snap = sim.snapshot(sim.time());
  EXPECT_LE((mean_x(snap) - expected).norm(), 1e-9 * (1 + expected.norm()));
}

TEST(Run, MeanConstantAcrossCommunications) {
  Simulation sim(ring_config(8, 1e9, 7));
  for (int k = 0; k < 5000; ++k) {
    const Event e = sim.next_event();
    const Eigen::VectorXd before = mean_x(sim.snapshot(e.t));
    sim.apply(e);
    if (e.kind == Event::Kind::comm) {
      const Eigen::VectorXd after = mean_x(sim.snapshot(e.t));
      EXPECT_LE((after - before).norm(), 1e-12 * (1 + before.norm()));
    }
  }
}

TEST(Run, StepAboveBoundNeedsOverride) {
  ExperimentConfig cfg = ring_config(4, 5.0);
  const double bound = resolve(cfg).gamma_bound;
  cfg.gamma = 1.5 * bound;
  try {
    run_simulation(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_config);
  }
  cfg.override_gamma = true;
  EXPECT_NO_THROW(run_simulation(cfg));
}

TEST(Run, DivergenceNamesEvent) {
  ExperimentConfig cfg = ring_config(4, 200.0);
  cfg.gamma = 50.0;
  cfg.override_gamma = true;
  try {
    run_simulation(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::diverged);
    EXPECT_NE(std::string(e.what()).find("event"), std::string::npos);
  }
}

TEST(Run, BipartiteRejectsBusyEndpoints) {
  ExperimentConfig cfg = ring_config(8, 50.0);
  cfg.comm_duration = 0.5;
  const Trace busy = run_simulation(cfg);
  EXPECT_GT(busy.rejected_comm_events, 0u);
  cfg.pairing = PairingMode::independent_poisson;
  EXPECT_EQ(run_simulation(cfg).rejected_comm_events, 0u);
  cfg.pairing = PairingMode::bipartite_matching;
  cfg.comm_duration = 0.0;
  EXPECT_EQ(run_simulation(cfg).rejected_comm_events, 0u);
}

TEST(Run, NonAcceleratedNeverSeparatesCompanion) {
  // With eta = 0 and alpha = alpha_tilde, x_tilde stays equal to x.
  ExperimentConfig cfg = ring_config(6, 20.0);
  cfg.accelerated = false;
  cfg.init_spread = 1.0;
  const Trace tr = run_simulation(cfg);
  for (const auto& s : tr.final_states) EXPECT_LE((s.x - s.x_tilde).norm(), 1e-13);
}

TEST(Run, PureGossipContracts) {
  for (bool acc : {false, true}) {
    std::vector<double> mean;
    const int seeds = 20;
    for (int seed = 0; seed < seeds; ++seed) {
      ExperimentConfig cfg = ring_config(16, 60.0, static_cast<std::uint64_t>(seed));
      cfg.gamma = 0.0;
      cfg.accelerated = acc;
      cfg.init_spread = 1.0;
      cfg.sample_period = 0.5;
      const Trace tr = run_simulation(cfg);
      if (mean.empty()) mean.assign(tr.samples.size(), 0.0);
      for (std::size_t k = 0; k < tr.samples.size(); ++k) mean[k] += tr.samples[k].consensus_sq / seeds;
    }
    std::vector<double> smooth;
    for (std::size_t k = 0; k + 10 <= mean.size(); k += 10) {
      double s = 0.0;
      for (std::size_t w = 0; w < 10; ++w) s += mean[k + w];
      smooth.push_back(s / 10);
    }
    for (std::size_t k = 1; k < smooth.size(); ++k) EXPECT_LE(smooth[k], smooth[k - 1]) << "acc=" << acc << " k=" << k;
  }
}

TEST(Baseline, MatchesGradientDescent) {
  ExperimentConfig cfg = ring_config(5, 50.0);
  cfg.objective.sigma = 0.0;
  const Trace tr = run_sync_baseline(cfg);
  const ResolvedExperiment res = resolve(cfg);
  auto grad = [&](const oracle::Vec& v) {
    Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
    const Eigen::VectorXd g = res.objective.grad(x);
    return oracle::Vec(g.data(), g.data() + g.size());
  };
  const Eigen::VectorXd xs = res.objective.global_optimum();
  for (int k : {1, 7, 50}) {
    const auto x = oracle::gradient_descent(grad, oracle::Vec(3, 0.0), tr.gamma, k);
    double d = 0.0;
    for (std::size_t c = 0; c < 3; ++c) d += (x[c] - xs(static_cast<Eigen::Index>(c))) * (x[c] - xs(static_cast<Eigen::Index>(c)));
    EXPECT_NEAR(tr.samples[static_cast<std::size_t>(k)].dist_opt_sq, d, 1e-12 * (1 + d));
  }
}

TEST(Baseline, ConsensusIdenticallyZero) {
  const Trace tr = run_sync_baseline(ring_config(6, 30.0));
  for (const auto& s : tr.samples) {
    EXPECT_EQ(s.consensus_sq, 0.0);
    EXPECT_EQ(s.comm_events, 0u);
  }
  EXPECT_EQ(tr.samples.back().grad_events, 6u * 30u);
}

TEST(Baseline, SingleWorkerMatchesSimulation) {
  // One worker, no edges: the simulator applies the same gradient draws, only
  // at Poisson times. After k gradient events both iterates agree bit for bit.
  const ExperimentConfig cfg = single_worker(40.0);
  const Trace base = run_sync_baseline(cfg);
  Simulation sim(cfg);
  EXPECT_EQ(sim.resolved().params.eta, 0.0);
  std::size_t step = 0;
  while (step < 30) {
    const Event e = sim.next_event();
    ASSERT_EQ(e.kind, Event::Kind::grad);
    sim.apply(e);
    ++step;
    const auto m = measure(sim.states(), sim.resolved().objective, e.t, step, 0);
    EXPECT_EQ(m.dist_opt_sq, base.samples[step].dist_opt_sq) << "step " << step;
  }
}

TEST(Baseline, UnitStepsWithFractionalSampling) {
  ExperimentConfig cfg = ring_config(3, 2.0);
  cfg.sample_period = 0.1;
  const Trace tr = run_sync_baseline(cfg);
  EXPECT_EQ(tr.samples.back().grad_events, 6u);
  EXPECT_EQ(tr.samples[10].grad_events, 3u);
}
