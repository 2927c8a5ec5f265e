#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "acid/error.hpp"
#include "acid/objective.hpp"
#include "oracles.hpp"

using namespace acid;

namespace {

Eigen::VectorXd random_vec(std::mt19937_64& rng, std::size_t d, double scale = 3.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = nd(rng);
  return v;
}

oracle::Vec to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const oracle::Vec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST(Quadratic, ZeroHeterogeneityGivesIdenticalWorkers) {
  const auto ens = ObjectiveEnsemble::build_quadratic(4, 2, 1.0, 1.0, 0.0, 0.0, 9);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_EQ(ens.center(i), ens.center(0));
    EXPECT_EQ(ens.hessian(i), ens.hessian(0));
  }
  EXPECT_LE((ens.global_optimum() - ens.center(0)).norm(), 1e-14);
  EXPECT_NEAR(ens.heterogeneity_sq(), 0.0, 1e-28);
}

TEST(Quadratic, TwoWorkersByHand) {
  const auto ens = ObjectiveEnsemble::from_quadratics(
      {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)}, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0)}, 0.0);
  const Eigen::VectorXd x = ens.global_optimum();
  EXPECT_NEAR(x(0), 1.0, 1e-15);
  EXPECT_NEAR(ens.local_grad(0, x)(0), 1.0, 1e-15);
  EXPECT_NEAR(ens.local_grad(1, x)(0), -1.0, 1e-15);
  EXPECT_NEAR(ens.heterogeneity_sq(), 1.0, 1e-15);
}

TEST(Quadratic, WeightedOptimum) {
  Eigen::MatrixXd a1(1, 1), a2(1, 1);
  a1 << 1.0;
  a2 << 3.0;
  const auto ens = ObjectiveEnsemble::from_quadratics({a1, a2}, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 4.0)}, 0.0);
  EXPECT_NEAR(ens.global_optimum()(0), 3.0, 1e-14);
  EXPECT_LE(ens.grad(ens.global_optimum()).norm(), 1e-12);
}

TEST(Quadratic, IdentityHessiansOptimumIsMeanCenter) {
  const auto ens = ObjectiveEnsemble::build_quadratic(5, 3, 1.0, 1.0, 2.0, 0.0, 4);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (std::size_t i = 0; i < 5; ++i) mean += ens.center(i);
  mean /= 5.0;
  EXPECT_LE((ens.global_optimum() - mean).norm(), 1e-12);
}

TEST(Quadratic, Determinism) {
  const auto a = ObjectiveEnsemble::build_quadratic(6, 4, 0.5, 3.0, 1.0, 0.1, 42);
  const auto b = ObjectiveEnsemble::build_quadratic(6, 4, 0.5, 3.0, 1.0, 0.1, 42);
  const auto c = ObjectiveEnsemble::build_quadratic(6, 4, 0.5, 3.0, 1.0, 0.1, 43);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.hessian(i), b.hessian(i));
    EXPECT_EQ(a.center(i), b.center(i));
  }
  EXPECT_NE(a.center(0), c.center(0));
}

TEST(Quadratic, ConstantsMatchSpectra) {
  for (std::size_t d : {1, 2, 5}) {
    const auto ens = ObjectiveEnsemble::build_quadratic(7, d, 0.25, 4.0, 1.0, 0.0, 2);
    EXPECT_NEAR(ens.strong_convexity(), 0.25, 1e-12);
    EXPECT_NEAR(ens.smoothness(), 4.0, 1e-12);
    for (std::size_t i = 0; i < 7; ++i) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ens.hessian(i));
      EXPECT_GE(es.eigenvalues().minCoeff(), 0.25 - 1e-12);
      EXPECT_LE(es.eigenvalues().maxCoeff(), 4.0 + 1e-12);
    }
  }
}

TEST(Quadratic, HeterogeneityIsExact) {
  for (double zeta : {0.1, 1.0, 7.5}) {
    const auto ens = ObjectiveEnsemble::build_quadratic(16, 3, 0.5, 2.0, zeta, 0.0, 8);
    EXPECT_NEAR(ens.heterogeneity_sq() / (zeta * zeta), 1.0, 1e-6);
  }
}

TEST(Quadratic, Errors) {
  EXPECT_THROW(ObjectiveEnsemble::build_quadratic(4, 2, 0.0, 1.0, 0, 0, 0), Error);
  EXPECT_THROW(ObjectiveEnsemble::build_quadratic(4, 2, 2.0, 1.0, 0, 0, 0), Error);
  EXPECT_THROW(ObjectiveEnsemble::build_quadratic(4, 2, 1.0, 1.0, -1, 0, 0), Error);
  EXPECT_THROW(ObjectiveEnsemble::build_quadratic(4, 2, 1.0, 1.0, 0, -1, 0), Error);
  const auto ens = ObjectiveEnsemble::build_quadratic(4, 2, 1.0, 1.0, 0, 0, 0);
  EXPECT_THROW(ens.local_grad(0, Eigen::VectorXd::Zero(3)), Error);
  EXPECT_THROW(ens.local_grad(4, Eigen::VectorXd::Zero(2)), Error);
}

TEST(Gradient, ZeroAtLocalCenter) {
  const auto ens = ObjectiveEnsemble::build_quadratic(3, 4, 0.5, 2.0, 1.0, 0.0, 1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(ens.local_grad(i, ens.center(i)).norm(), 1e-14);
}

TEST(Gradient, ScalarByHand) {
  Eigen::MatrixXd a(1, 1);
  a << 2.0;
  const auto ens = ObjectiveEnsemble::from_quadratics({a}, {Eigen::VectorXd::Zero(1)}, 0.0);
  EXPECT_DOUBLE_EQ(ens.local_grad(0, Eigen::VectorXd::Constant(1, 3.0))(0), 6.0);
}

TEST(Gradient, FiniteDifferences) {
  std::mt19937_64 rng(21);
  const auto quad = ObjectiveEnsemble::build_quadratic(3, 5, 0.5, 2.0, 1.0, 0.0, 3);
  const auto pert = ObjectiveEnsemble::build_perturbed_quadratic(3, 5, 0.7, 1.0, 0.0, 3);
  for (const auto* ens : {&quad, &pert}) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t i = static_cast<std::size_t>(trial) % 3;
      const Eigen::VectorXd x = random_vec(rng, 5);
      const auto fd = oracle::central_difference(
          [&](const oracle::Vec& v) { return ens->local_value(i, to_eigen(v)); }, to_std(x));
      EXPECT_LE((ens->local_grad(i, x) - to_eigen(fd)).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(Gradient, Smoothness) {
  std::mt19937_64 rng(23);
  const auto quad = ObjectiveEnsemble::build_quadratic(4, 3, 0.3, 2.5, 1.0, 0.0, 5);
  const auto pert = ObjectiveEnsemble::build_perturbed_quadratic(4, 3, 0.6, 1.0, 0.0, 5);
  for (const auto* ens : {&quad, &pert}) {
    const double L = ens->smoothness();
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t i = static_cast<std::size_t>(trial) % 4;
      const Eigen::VectorXd x = random_vec(rng, 3), y = random_vec(rng, 3);
      EXPECT_LE((ens->local_grad(i, x) - ens->local_grad(i, y)).norm(), L * (x - y).norm() * (1 + 1e-12));
    }
  }
}

TEST(Gradient, StrongConvexity) {
  std::mt19937_64 rng(29);
  const auto ens = ObjectiveEnsemble::build_quadratic(4, 3, 0.3, 2.5, 1.0, 0.0, 6);
  const double mu = ens.strong_convexity();
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t i = static_cast<std::size_t>(trial) % 4;
    const Eigen::VectorXd x = random_vec(rng, 3), y = random_vec(rng, 3);
    EXPECT_GE((ens.local_grad(i, x) - ens.local_grad(i, y)).dot(x - y), mu * (x - y).squaredNorm() * (1 - 1e-12));
  }
}

TEST(StochasticGradient, NoNoiseIsExact) {
  const auto ens = ObjectiveEnsemble::build_quadratic(2, 3, 1.0, 2.0, 1.0, 0.0, 1);
  RandomStream rng(5);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.7);
  EXPECT_EQ(ens.local_stoch_grad(1, x, rng), ens.local_grad(1, x));
}

TEST(StochasticGradient, Unbiased) {
  const double sigma = 2.0;
  const auto ens = ObjectiveEnsemble::build_quadratic(2, 3, 1.0, 2.0, 1.0, sigma, 1);
  RandomStream rng(77);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, -0.4);
  const int draws = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  double var = 0.0;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd g = ens.local_stoch_grad(0, x, rng);
    mean += g;
    var += (g - ens.local_grad(0, x)).squaredNorm();
  }
  mean /= draws;
  var /= draws;
  EXPECT_LE((mean - ens.local_grad(0, x)).cwiseAbs().maxCoeff(), 4 * sigma / std::sqrt(draws));
  // Per-call variance is sigma^2 * d.
  EXPECT_NEAR(var / (sigma * sigma * 3), 1.0, 0.02);
}

TEST(StochasticGradient, SameStreamSameDraws) {
  const auto ens = ObjectiveEnsemble::build_quadratic(2, 3, 1.0, 2.0, 1.0, 1.0, 1);
  RandomStream a(9), b(9);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(ens.local_stoch_grad(1, x, a), ens.local_stoch_grad(1, x, b));
}

TEST(Perturbed, ZeroEpsilonMatchesIdentityQuadratic) {
  const auto pert = ObjectiveEnsemble::build_perturbed_quadratic(3, 2, 0.0, 1.0, 0.0, 5);
  std::vector<Eigen::MatrixXd> eye(3, Eigen::MatrixXd::Identity(2, 2));
  std::vector<Eigen::VectorXd> centers;
  for (std::size_t i = 0; i < 3; ++i) centers.push_back(pert.center(i));
  const auto quad = ObjectiveEnsemble::from_quadratics(eye, centers, 0.0);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = random_vec(rng, 2);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(pert.local_value(i, x), quad.local_value(i, x), 1e-12);
      EXPECT_LE((pert.local_grad(i, x) - quad.local_grad(i, x)).norm(), 1e-12);
    }
  }
}

TEST(Perturbed, HandValues) {
  // Centers are random, so compare against x - c - eps sin(x) with c read back.
  const auto ens = ObjectiveEnsemble::build_perturbed_quadratic(1, 1, 0.5, 0.0, 0.0, 0);
  const double c = ens.center(0)(0);
  const double h = std::numbers::pi / 2;
  EXPECT_NEAR(ens.local_grad(0, Eigen::VectorXd::Constant(1, h))(0), (h - c) - 0.5, 1e-15);
  EXPECT_NEAR(ens.local_grad(0, Eigen::VectorXd::Zero(1))(0), -c, 1e-15);
  EXPECT_NEAR(ens.local_value(0, Eigen::VectorXd::Zero(1)), 0.5 * c * c + 0.5, 1e-15);
}

TEST(Perturbed, ConstantsAndNoOptimum) {
  const auto ens = ObjectiveEnsemble::build_perturbed_quadratic(8, 3, 0.4, 2.0, 0.0, 1);
  EXPECT_DOUBLE_EQ(ens.smoothness(), 1.4);
  EXPECT_FALSE(ens.has_closed_form_optimum());
  try {
    ens.global_optimum();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unsupported);
  }
  EXPECT_NEAR(ens.heterogeneity_sq() / 4.0, 1.0, 1e-6);
}

TEST(Perturbed, EpsilonRange) {
  EXPECT_THROW(ObjectiveEnsemble::build_perturbed_quadratic(2, 1, 1.0, 0, 0, 0), Error);
  EXPECT_THROW(ObjectiveEnsemble::build_perturbed_quadratic(2, 1, -0.1, 0, 0, 0), Error);
}

TEST(ObjectiveSpec, RoundTripsThroughFactory) {
  ObjectiveSpec spec{ObjectiveKind::quadratic, 5, 2, 0.5, 2.0, 0.0, 1.0, 0.3, 17};
  const auto a = ObjectiveEnsemble::from_spec(spec);
  EXPECT_EQ(a.spec(), spec);
  const auto b = ObjectiveEnsemble::from_spec(a.spec());
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.center(i), b.center(i));
  EXPECT_EQ(parse_objective_kind(to_string(ObjectiveKind::perturbed_quadratic)), ObjectiveKind::perturbed_quadratic);
}
