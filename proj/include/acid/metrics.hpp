#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "acid/dynamics.hpp"

namespace acid {

/// One row of a trace. dist_opt_sq is NaN when the run has no known optimum.
struct MetricSample {
  double t = 0.0;
  double consensus_sq = 0.0;  // sum_i |x_i - xbar|^2
  double loss_mean = 0.0;     // f(xbar)
  double dist_opt_sq = 0.0;   // |xbar - x*|^2
  double grad_norm_sq_mean = 0.0;  // |grad f(xbar)|^2
  std::uint64_t grad_events = 0;
  std::uint64_t comm_events = 0;
};

Eigen::VectorXd mean_x(std::span<const WorkerState> states);
Eigen::VectorXd mean_x_tilde(std::span<const WorkerState> states);

/// sum_i |x_i - xbar|^2. Use consensus_distance(...) / n for the per-worker
/// average.
double consensus_distance(std::span<const WorkerState> states);
double consensus_distance(std::span<const Eigen::VectorXd> xs);

/// Inputs of the Lyapunov potentials. `laplacian_pinv` is the pseudoinverse
/// of the run's Laplacian; `rate` is the exponent r of A_t = exp(-r t).
struct PotentialContext {
  Eigen::VectorXd x_star;
  Eigen::MatrixXd laplacian_pinv;
  double chi1 = 1.0;
  double rate = 0.0;
};

/// sum over coordinates of (pi v)^T L^+ (pi v), v the stacked x or x_tilde.
double pinv_seminorm_sq(std::span<const WorkerState> states, const Eigen::MatrixXd& pinv,
                        bool use_tilde);

/// A_t |xbar - x*|^2 + B_t |pi x|^2 + Bt_t (pi x~)^T L^+ (pi x~),
/// with A_t = exp(-r t), B_t = A_t / n, Bt_t = B_t / chi1.
double lyapunov_phi2(std::span<const WorkerState> states, double t, const PotentialContext& ctx);

/// exp(-r t) (|xbar - x*|^2 + |pi x|^2 / n).
double lyapunov_phi1(std::span<const WorkerState> states, double t, const PotentialContext& ctx);

class ObjectiveEnsemble;

/// d_f(xbar, x*) + (L/n) |pi x|^2, d_f the Bregman divergence of f.
double lyapunov_phi3(std::span<const WorkerState> states, const ObjectiveEnsemble& objective,
                     const PotentialContext& ctx);

/// phi3 + (L / (n chi1)) (pi x)^T L^+ (pi x).
double lyapunov_phi4(std::span<const WorkerState> states, const ObjectiveEnsemble& objective,
                     const PotentialContext& ctx);

/// Trapezoidal (1/T) * integral of grad_norm_sq_mean over the trace span.
double time_avg_grad_norm(std::span<const MetricSample> samples);

}  // namespace acid
