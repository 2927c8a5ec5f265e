#include "acid/dynamics.hpp"

#include <cmath>
#include <string>

#include "acid/error.hpp"

namespace acid {

AcidParams acid_params(double chi1, double chi2, bool accelerated) {
  require(std::isfinite(chi1) && std::isfinite(chi2) && chi1 > 0.0 && chi2 > 0.0,
          "chi1 and chi2 must be positive");
  require(chi2 <= chi1 * (1.0 + 1e-12), "chi2 must not exceed chi1");
  if (!accelerated) return {0.0, 0.5, 0.5, chi1};
  const double geo = std::sqrt(chi1 * chi2);
  return {1.0 / (2.0 * geo), 0.5, 0.5 * std::sqrt(chi1 / chi2), geo};
}

double step_size_bound(double L, double chi, Regime regime, double c_nonconvex) {
  require(L > 0.0 && std::isfinite(L), "L must be positive");
  require(chi >= 0.0 && std::isfinite(chi), "chi must be non-negative");
  if (regime == Regime::strongly_convex) return 1.0 / (16.0 * L * (1.0 + chi));
  require(c_nonconvex > 0.0, "non-convex constant must be positive");
  return c_nonconvex / (L * (1.0 + chi));
}

MixCoefficients mix_coefficients(double eta, double dt) {
  const double decay = std::exp(-2.0 * eta * dt);
  return {0.5 * (1.0 + decay), 0.5 * (1.0 - decay)};
}

void momentum_mix(WorkerState& s, double eta, double t_now) {
  if (t_now < s.t_last) {
    fail(ErrorCode::clock_regression, "clock regression: mix to t=" + std::to_string(t_now) +
                                          " before t_last=" + std::to_string(s.t_last));
  }
  if (eta != 0.0 && t_now != s.t_last) {
    const auto [keep, cross] = mix_coefficients(eta, t_now - s.t_last);
    Eigen::VectorXd x = keep * s.x + cross * s.x_tilde;
    s.x_tilde = cross * s.x + keep * s.x_tilde;
    s.x = std::move(x);
  }
  s.t_last = t_now;
}

WorkerState mixed_forward(const WorkerState& s, double eta, double t_now) {
  WorkerState copy = s;
  momentum_mix(copy, eta, t_now);
  return copy;
}

void grad_step(WorkerState& s, const Eigen::VectorXd& g, double gamma) {
  require(g.size() == s.x.size(), "gradient dimension mismatch");
  s.x.noalias() -= gamma * g;
  s.x_tilde.noalias() -= gamma * g;
}

void pairwise_average(WorkerState& si, WorkerState& sj, const AcidParams& p) {
  require(si.x.size() == sj.x.size(), "pairwise average dimension mismatch");
  const Eigen::VectorXd m = si.x - sj.x;
  si.x.noalias() -= p.alpha * m;
  sj.x.noalias() += p.alpha * m;
  si.x_tilde.noalias() -= p.alpha_tilde * m;
  sj.x_tilde.noalias() += p.alpha_tilde * m;
}

}  // namespace acid
