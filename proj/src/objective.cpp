#include "acid/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "acid/error.hpp"

namespace acid {

namespace {

Eigen::MatrixXd random_orthogonal(std::size_t d, RandomStream& rng) {
  const auto dim = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix makes Q Haar-distributed.
  const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < dim; ++c)
    if (rr(c, c) < 0) q.col(c) *= -1.0;
  return q;
}

Eigen::VectorXd gaussian_vector(std::size_t d, RandomStream& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.normal();
  return v;
}

}  // namespace

ObjectiveKind parse_objective_kind(std::string_view name) {
  if (name == "quadratic") return ObjectiveKind::quadratic;
  if (name == "perturbed-quadratic") return ObjectiveKind::perturbed_quadratic;
  fail(ErrorCode::invalid_argument, "unknown objective kind '" + std::string(name) + "'");
}

std::string_view to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::quadratic ? "quadratic" : "perturbed-quadratic";
}

ObjectiveEnsemble ObjectiveEnsemble::build_quadratic(std::size_t n, std::size_t d, double mu,
                                                     double L, double zeta, double sigma,
                                                     std::uint64_t seed) {
  require(n >= 1 && d >= 1, "ensemble needs n >= 1 and d >= 1");
  require(mu > 0.0, "mu must be positive");
  require(mu <= L, "mu must not exceed L");
  require(zeta >= 0.0 && sigma >= 0.0, "zeta and sigma must be non-negative");

  RandomStream rng(derive_seed(seed, kObjectiveStream));
  ObjectiveEnsemble ens;
  ens.spec_ = {ObjectiveKind::quadratic, n, d, mu, L, 0.0, zeta, sigma, seed};

  const auto dim = static_cast<Eigen::Index>(d);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd spectrum(dim);
    for (Eigen::Index k = 0; k < dim; ++k) spectrum(k) = mu + (L - mu) * rng.uniform();
    // Pin the extremes so the ensemble constants equal the requested mu, L.
    if (i == 0) spectrum(0) = mu;
    if (dim > 1 && i == 0) spectrum(dim - 1) = L;
    if (dim == 1 && i == 1) spectrum(0) = L;
    const Eigen::MatrixXd q = random_orthogonal(d, rng);
    if (mu == L) {
      ens.hessians_.push_back(Eigen::MatrixXd::Identity(dim, dim) * mu);
    } else {
      Eigen::MatrixXd a = q * spectrum.asDiagonal() * q.transpose();
      ens.hessians_.push_back(0.5 * (a + a.transpose()));
    }
  }

  // Centers are base + scale * u_i; the heterogeneity at the optimum is then
  // exactly quadratic in scale.
  const Eigen::VectorXd base = gaussian_vector(d, rng);
  std::vector<Eigen::VectorXd> offsets;
  for (std::size_t i = 0; i < n; ++i) offsets.push_back(gaussian_vector(d, rng));

  ens.centers_.assign(n, base);
  Eigen::MatrixXd sum_a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd sum_au = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < n; ++i) {
    sum_a += ens.hessians_[i];
    sum_au += ens.hessians_[i] * offsets[i];
  }
  const Eigen::VectorXd w = sum_a.ldlt().solve(sum_au);
  double het_unit = 0.0;
  for (std::size_t i = 0; i < n; ++i) het_unit += (ens.hessians_[i] * (w - offsets[i])).squaredNorm();
  het_unit /= static_cast<double>(n);

  const double scale = (zeta > 0.0 && het_unit > 0.0) ? zeta / std::sqrt(het_unit) : 0.0;
  require(zeta == 0.0 || het_unit > 0.0, "heterogeneity cannot be dialed for a single worker");
  for (std::size_t i = 0; i < n; ++i) ens.centers_[i] = base + scale * offsets[i];
  ens.finalize();
  return ens;
}

ObjectiveEnsemble ObjectiveEnsemble::build_perturbed_quadratic(std::size_t n, std::size_t d,
                                                               double epsilon, double zeta,
                                                               double sigma, std::uint64_t seed) {
  require(n >= 1 && d >= 1, "ensemble needs n >= 1 and d >= 1");
  require(epsilon >= 0.0 && epsilon < 1.0, "epsilon must lie in [0, 1)");
  require(zeta >= 0.0 && sigma >= 0.0, "zeta and sigma must be non-negative");

  RandomStream rng(derive_seed(seed, kObjectiveStream));
  ObjectiveEnsemble ens;
  ens.spec_ = {ObjectiveKind::perturbed_quadratic, n, d, 1.0, 1.0, epsilon, zeta, sigma, seed};

  const Eigen::VectorXd base = gaussian_vector(d, rng);
  std::vector<Eigen::VectorXd> offsets;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    offsets.push_back(gaussian_vector(d, rng));
    mean += offsets.back();
  }
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (auto& u : offsets) {
    u -= mean;
    spread += u.squaredNorm();
  }
  spread /= static_cast<double>(n);
  require(zeta == 0.0 || spread > 0.0, "heterogeneity cannot be dialed for a single worker");
  const double scale = (zeta > 0.0) ? zeta / std::sqrt(spread) : 0.0;
  for (const auto& u : offsets) ens.centers_.push_back(base + scale * u);
  ens.finalize();
  return ens;
}

ObjectiveEnsemble ObjectiveEnsemble::from_spec(const ObjectiveSpec& spec) {
  if (spec.kind == ObjectiveKind::quadratic) {
    return build_quadratic(spec.n, spec.d, spec.mu, spec.L, spec.zeta, spec.sigma, spec.seed);
  }
  return build_perturbed_quadratic(spec.n, spec.d, spec.epsilon, spec.zeta, spec.sigma, spec.seed);
}

ObjectiveEnsemble ObjectiveEnsemble::from_quadratics(std::vector<Eigen::MatrixXd> hessians,
                                                     std::vector<Eigen::VectorXd> centers,
                                                     double sigma) {
  require(!hessians.empty() && hessians.size() == centers.size(),
          "need one center per Hessian");
  require(sigma >= 0.0, "sigma must be non-negative");
  const auto d = centers.front().size();
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    require(centers[i].size() == d && hessians[i].rows() == d && hessians[i].cols() == d,
            "dimension mismatch in explicit quadratic ensemble");
  }
  ObjectiveEnsemble ens;
  ens.hessians_ = std::move(hessians);
  ens.centers_ = std::move(centers);
  ens.spec_.kind = ObjectiveKind::quadratic;
  ens.spec_.n = ens.centers_.size();
  ens.spec_.d = static_cast<std::size_t>(d);
  ens.spec_.sigma = sigma;
  ens.finalize();
  ens.spec_.mu = ens.mu_;
  ens.spec_.L = ens.L_;
  ens.spec_.zeta = std::sqrt(ens.heterogeneity_sq());
  return ens;
}

void ObjectiveEnsemble::finalize() {
  if (spec_.kind == ObjectiveKind::perturbed_quadratic) {
    L_ = 1.0 + spec_.epsilon;
    mu_ = 1.0 - spec_.epsilon;
    optimum_.reset();
    return;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const auto dim = static_cast<Eigen::Index>(spec_.d);
  Eigen::MatrixXd sum_a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd sum_ac = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hessians_[i], Eigen::EigenvaluesOnly);
    lo = std::min(lo, solver.eigenvalues()(0));
    hi = std::max(hi, solver.eigenvalues()(dim - 1));
    sum_a += hessians_[i];
    sum_ac += hessians_[i] * centers_[i];
  }
  require(lo > 0.0, "quadratic Hessians must be positive definite");
  mu_ = lo;
  L_ = hi;
  optimum_ = sum_a.ldlt().solve(sum_ac);
}

void ObjectiveEnsemble::check_args(std::size_t i, const Eigen::VectorXd& x) const {
  require(i < centers_.size(), "worker index out of range");
  require(static_cast<std::size_t>(x.size()) == spec_.d,
          "dimension mismatch: expected " + std::to_string(spec_.d) + ", got " +
              std::to_string(x.size()));
}

double ObjectiveEnsemble::local_value(std::size_t i, const Eigen::VectorXd& x) const {
  check_args(i, x);
  const Eigen::VectorXd r = x - centers_[i];
  if (spec_.kind == ObjectiveKind::quadratic) return 0.5 * r.dot(hessians_[i] * r);
  return 0.5 * r.squaredNorm() + spec_.epsilon * x.array().cos().sum();
}

Eigen::VectorXd ObjectiveEnsemble::local_grad(std::size_t i, const Eigen::VectorXd& x) const {
  check_args(i, x);
  if (spec_.kind == ObjectiveKind::quadratic) return hessians_[i] * (x - centers_[i]);
  return (x - centers_[i]).array() - spec_.epsilon * x.array().sin();
}

Eigen::VectorXd ObjectiveEnsemble::local_stoch_grad(std::size_t i, const Eigen::VectorXd& x,
                                                    RandomStream& rng) const {
  Eigen::VectorXd g = local_grad(i, x);
  if (spec_.sigma > 0.0) {
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) += spec_.sigma * rng.normal();
  }
  return g;
}

double ObjectiveEnsemble::value(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < centers_.size(); ++i) total += local_value(i, x);
  return total / static_cast<double>(centers_.size());
}

Eigen::VectorXd ObjectiveEnsemble::grad(const Eigen::VectorXd& x) const {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(x.size());
  for (std::size_t i = 0; i < centers_.size(); ++i) total += local_grad(i, x);
  return total / static_cast<double>(centers_.size());
}

Eigen::VectorXd ObjectiveEnsemble::global_optimum() const {
  if (!optimum_) {
    fail(ErrorCode::unsupported, "no closed-form optimum for the perturbed-quadratic ensemble");
  }
  return *optimum_;
}

double ObjectiveEnsemble::heterogeneity_sq() const {
  const Eigen::VectorXd at =
      optimum_ ? *optimum_ : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec_.d));
  const Eigen::VectorXd mean_grad = grad(at);
  double total = 0.0;
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    total += (local_grad(i, at) - mean_grad).squaredNorm();
  }
  return total / static_cast<double>(centers_.size());
}

}  // namespace acid
