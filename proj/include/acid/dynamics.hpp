#pragma once

#include <Eigen/Dense>

namespace acid {

/// One worker's coupled parameter pair and the time it was last brought
/// up to date. x and x_tilde always share a dimension.
struct WorkerState {
  Eigen::VectorXd x;
  Eigen::VectorXd x_tilde;
  double t_last = 0.0;

  static WorkerState at(const Eigen::VectorXd& x0) { return {x0, x0, 0.0}; }
};

struct AcidParams {
  double eta = 0.0;          // mixing rate between x and x_tilde (1/time)
  double alpha = 0.5;        // weight of the pairwise step on x
  double alpha_tilde = 0.5;  // weight of the pairwise step on x_tilde
  double chi = 0.0;          // graph constant entering the step-size bound
};

/// Non-accelerated: eta = 0, alpha = alpha_tilde = 1/2, chi = chi1.
/// Accelerated: eta = 1 / (2 sqrt(chi1 chi2)), alpha = 1/2,
///              alpha_tilde = sqrt(chi1 / chi2) / 2, chi = sqrt(chi1 chi2).
/// Requires 0 < chi2 <= chi1 (with a relative slack of 1e-12 for rounding).
AcidParams acid_params(double chi1, double chi2, bool accelerated);

enum class Regime { strongly_convex, non_convex };

inline constexpr double kDefaultNonConvexConstant = 1.0 / 48.0;

/// Largest admissible constant step size:
///   strongly convex  1 / (16 L (1 + chi))
///   non-convex       c / (L (1 + chi))
double step_size_bound(double L, double chi, Regime regime,
                       double c_nonconvex = kDefaultNonConvexConstant);

struct MixCoefficients {
  double keep;   // (1 + exp(-2 eta dt)) / 2
  double cross;  // (1 - exp(-2 eta dt)) / 2
};

/// Closed-form exp(dt * [[-eta, eta], [eta, -eta]]).
MixCoefficients mix_coefficients(double eta, double dt);

/// Integrates the x <-> x_tilde coupling from s.t_last to t_now and sets
/// s.t_last = t_now. Throws ErrorCode::clock_regression if t_now < t_last.
void momentum_mix(WorkerState& s, double eta, double t_now);

/// Copy of s mixed forward to t_now; s is untouched.
WorkerState mixed_forward(const WorkerState& s, double eta, double t_now);

/// x -= gamma g and x_tilde -= gamma g. Leaves t_last alone.
void grad_step(WorkerState& s, const Eigen::VectorXd& g, double gamma);

/// m = x_i - x_j, then x_i -= alpha m, x_j += alpha m,
/// x_tilde_i -= alpha_tilde m, x_tilde_j += alpha_tilde m.
/// Both states must already be mixed to the event time.
void pairwise_average(WorkerState& si, WorkerState& sj, const AcidParams& p);

}  // namespace acid
