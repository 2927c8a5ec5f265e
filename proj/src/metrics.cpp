#include "acid/metrics.hpp"

#include <cmath>
#include <limits>

#include "acid/error.hpp"
#include "acid/objective.hpp"

namespace acid {

namespace {

void check_states(std::span<const WorkerState> states) {
  require(!states.empty(), "need at least one worker");
  const auto d = states.front().x.size();
  for (const auto& s : states) {
    require(s.x.size() == d && s.x_tilde.size() == d, "dimension mismatch among workers");
  }
}

}  // namespace

Eigen::VectorXd mean_x(std::span<const WorkerState> states) {
  check_states(states);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(states.front().x.size());
  for (const auto& s : states) total += s.x;
  return total / static_cast<double>(states.size());
}

Eigen::VectorXd mean_x_tilde(std::span<const WorkerState> states) {
  check_states(states);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(states.front().x.size());
  for (const auto& s : states) total += s.x_tilde;
  return total / static_cast<double>(states.size());
}

double consensus_distance(std::span<const Eigen::VectorXd> xs) {
  require(!xs.empty(), "need at least one worker");
  const auto d = xs.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& x : xs) {
    require(x.size() == d, "dimension mismatch among workers");
    mean += x;
  }
  mean /= static_cast<double>(xs.size());
  double total = 0.0;
  for (const auto& x : xs) total += (x - mean).squaredNorm();
  return total;
}

double consensus_distance(std::span<const WorkerState> states) {
  const Eigen::VectorXd mean = mean_x(states);
  double total = 0.0;
  for (const auto& s : states) total += (s.x - mean).squaredNorm();
  return total;
}

double pinv_seminorm_sq(std::span<const WorkerState> states, const Eigen::MatrixXd& pinv,
                        bool use_tilde) {
  check_states(states);
  const auto n = static_cast<Eigen::Index>(states.size());
  require(pinv.rows() == n && pinv.cols() == n, "pseudoinverse size does not match workers");
  const auto d = states.front().x.size();
  Eigen::MatrixXd stacked(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = states[static_cast<std::size_t>(i)];
    stacked.row(i) = (use_tilde ? s.x_tilde : s.x).transpose();
  }
  // Project each coordinate column onto the complement of the ones vector.
  stacked.rowwise() -= stacked.colwise().mean();
  return (stacked.transpose() * pinv * stacked).trace();
}

double lyapunov_phi1(std::span<const WorkerState> states, double t, const PotentialContext& ctx) {
  require(ctx.x_star.size() > 0, "potential needs the optimum x*");
  const double n = static_cast<double>(states.size());
  const double a = std::exp(-ctx.rate * t);
  return a * ((mean_x(states) - ctx.x_star).squaredNorm() + consensus_distance(states) / n);
}

double lyapunov_phi2(std::span<const WorkerState> states, double t, const PotentialContext& ctx) {
  require(ctx.x_star.size() > 0, "potential needs the optimum x*");
  require(ctx.chi1 > 0.0, "chi1 must be positive");
  const double n = static_cast<double>(states.size());
  const double a = std::exp(-ctx.rate * t);
  const double b = a / n;
  const double b_tilde = b / ctx.chi1;
  return a * (mean_x(states) - ctx.x_star).squaredNorm() + b * consensus_distance(states) +
         b_tilde * pinv_seminorm_sq(states, ctx.laplacian_pinv, true);
}

double lyapunov_phi3(std::span<const WorkerState> states, const ObjectiveEnsemble& objective,
                     const PotentialContext& ctx) {
  require(ctx.x_star.size() > 0, "potential needs the optimum x*");
  const Eigen::VectorXd xbar = mean_x(states);
  const double bregman = objective.value(xbar) - objective.value(ctx.x_star) -
                         objective.grad(ctx.x_star).dot(xbar - ctx.x_star);
  const double b = objective.smoothness() / static_cast<double>(states.size());
  return bregman + b * consensus_distance(states);
}

double lyapunov_phi4(std::span<const WorkerState> states, const ObjectiveEnsemble& objective,
                     const PotentialContext& ctx) {
  require(ctx.chi1 > 0.0, "chi1 must be positive");
  const double b = objective.smoothness() / static_cast<double>(states.size());
  return lyapunov_phi3(states, objective, ctx) +
         (b / ctx.chi1) * pinv_seminorm_sq(states, ctx.laplacian_pinv, false);
}

double time_avg_grad_norm(std::span<const MetricSample> samples) {
  require(!samples.empty(), "time average of an empty trace");
  if (samples.size() == 1) return samples.front().grad_norm_sq_mean;
  double integral = 0.0;
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double dt = samples[k].t - samples[k - 1].t;
    integral += 0.5 * dt * (samples[k].grad_norm_sq_mean + samples[k - 1].grad_norm_sq_mean);
  }
  const double span = samples.back().t - samples.front().t;
  require(span > 0.0, "trace spans zero time");
  return integral / span;
}

}  // namespace acid
