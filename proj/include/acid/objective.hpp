#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "acid/rng.hpp"

namespace acid {

enum class ObjectiveKind { quadratic, perturbed_quadratic };

ObjectiveKind parse_objective_kind(std::string_view name);
std::string_view to_string(ObjectiveKind kind);

/// Reproducible description of an ensemble: hyperparameters plus seed.
/// The matrices themselves are regenerated from it.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::quadratic;
  std::size_t n = 2;
  std::size_t d = 1;
  double mu = 1.0;       // quadratic only
  double L = 1.0;        // quadratic only
  double epsilon = 0.0;  // perturbed-quadratic only
  double zeta = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;
};

/// Per-worker objectives f_i with known smoothness, curvature and
/// heterogeneity.
///
///  quadratic:           f_i(x) = 1/2 (x - c_i)^T A_i (x - c_i)
///  perturbed-quadratic: f_i(x) = 1/2 |x - c_i|^2 + eps * sum_k cos(x_k)
///
/// Stochastic gradients add sigma * N(0, I) noise, so the per-call variance
/// is sigma^2 * d.
class ObjectiveEnsemble {
 public:
  static ObjectiveEnsemble build_quadratic(std::size_t n, std::size_t d, double mu, double L,
                                           double zeta, double sigma, std::uint64_t seed);
  static ObjectiveEnsemble build_perturbed_quadratic(std::size_t n, std::size_t d,
                                                     double epsilon, double zeta, double sigma,
                                                     std::uint64_t seed);
  static ObjectiveEnsemble from_spec(const ObjectiveSpec& spec);

  /// Quadratic ensemble from explicit matrices and centers (no rescaling).
  static ObjectiveEnsemble from_quadratics(std::vector<Eigen::MatrixXd> hessians,
                                           std::vector<Eigen::VectorXd> centers, double sigma);

  const ObjectiveSpec& spec() const { return spec_; }
  ObjectiveKind kind() const { return spec_.kind; }
  std::size_t size() const { return centers_.size(); }
  std::size_t dim() const { return spec_.d; }
  double smoothness() const { return L_; }
  double strong_convexity() const { return mu_; }
  double sigma() const { return spec_.sigma; }
  const Eigen::VectorXd& center(std::size_t i) const { return centers_.at(i); }
  const Eigen::MatrixXd& hessian(std::size_t i) const { return hessians_.at(i); }

  double local_value(std::size_t i, const Eigen::VectorXd& x) const;
  Eigen::VectorXd local_grad(std::size_t i, const Eigen::VectorXd& x) const;
  Eigen::VectorXd local_stoch_grad(std::size_t i, const Eigen::VectorXd& x,
                                   RandomStream& rng) const;

  /// f(x) = (1/n) sum_i f_i(x) and its gradient.
  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad(const Eigen::VectorXd& x) const;

  /// Closed-form minimizer; quadratic ensembles only.
  Eigen::VectorXd global_optimum() const;
  bool has_closed_form_optimum() const { return optimum_.has_value(); }

  /// (1/n) sum_i |grad f_i(x*) - grad f(x*)|^2 evaluated at the minimizer
  /// (quadratic) or, for the perturbed family, at any point (it is constant).
  double heterogeneity_sq() const;

 private:
  ObjectiveEnsemble() = default;
  void check_args(std::size_t i, const Eigen::VectorXd& x) const;
  void finalize();

  ObjectiveSpec spec_;
  std::vector<Eigen::MatrixXd> hessians_;  // empty for perturbed-quadratic
  std::vector<Eigen::VectorXd> centers_;
  double L_ = 1.0;
  double mu_ = 1.0;
  std::optional<Eigen::VectorXd> optimum_;
};

}  // namespace acid
