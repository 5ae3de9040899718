#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "pushsum/problems/quartic.hpp"
#include "pushsum/problems/sparse.hpp"
#include "pushsum/problems/tracking.hpp"
#include "test_costs.hpp"

using namespace pushsum;

TEST(SampleSphere, UnitNormAndMoments) {
  Rng rng(1);
  const Eigen::Index m = 4;
  Vector mean = Vector::Zero(m);
  Matrix second = Matrix::Zero(m, m);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const Vector z = sample_sphere(rng, m);
    ASSERT_NEAR(z.norm(), 1.0, 1e-12);
    mean += z;
    second += z * z.transpose();
  }
  mean /= draws;
  second /= draws;
  EXPECT_LE(mean.cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LE((second - Matrix::Identity(m, m) / static_cast<double>(m)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(SampleSphere, OneDimensionIsASign) {
  Rng rng(2);
  int plus = 0;
  for (int k = 0; k < 10000; ++k) {
    const double v = sample_sphere(rng, 1)(0);
    ASSERT_TRUE(v == 1.0 || v == -1.0);
    plus += v > 0;
  }
  EXPECT_NEAR(plus / 10000.0, 0.5, 0.03);
}

TEST(ZerothOrder, ConstantCostGivesZero) {
  const ConvexSet set = ConvexSet::ball(Vector::Zero(3), 1.0);
  const testcost::Function c(1, 3, [](const Vector&) { return 7.0; },
                             [](const Vector&) { return Vector(Vector::Zero(3)); }, 0.0);
  Rng rng(3);
  const Vector g = zo_gradient(c, set, 0, 0, Vector::Zero(3), sample_sphere(rng, 3), 1e-3);
  EXPECT_EQ(g, Vector::Zero(3));
}

TEST(ZerothOrder, QuadraticHandExample) {
  const ConvexSet set = ConvexSet::ball(Vector::Zero(2), 5.0);
  const testcost::Function c(1, 2, [](const Vector& x) { return x.squaredNorm(); },
                             [](const Vector& x) { return Vector(2.0 * x); }, 20.0);
  const Vector g = zo_gradient(c, set, 0, 0, Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}, 1e-3);
  EXPECT_NEAR(g(0), 0.0, 1e-15);
  EXPECT_NEAR(g(1), 0.002, 1e-12);
}

TEST(ZerothOrder, LinearCostMonteCarloMean) {
  const Vector a{{1.0, -2.0, 0.5}};
  const ConvexSet set = ConvexSet::ball(Vector::Zero(3), 1.0);
  const testcost::Function c(1, 3, [a](const Vector& x) { return a.dot(x); },
                             [a](const Vector&) { return a; }, a.norm());
  Rng rng(4);
  Vector mean = Vector::Zero(3);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const Vector z = sample_sphere(rng, 3);
    const Vector g = zo_gradient(c, set, 0, 0, Vector::Zero(3), z, 1e-3);
    EXPECT_NEAR((g - 3.0 * a.dot(z) * z).norm(), 0.0, 1e-9);
    mean += g;
  }
  mean /= draws;
  EXPECT_LE((mean - a).norm() / a.norm(), 0.02);
}

TEST(ZerothOrder, QueryOutsideSetIsAnInvariantViolation) {
  const ConvexSet set = ConvexSet::ball(Vector::Zero(2), 1.0);
  const testcost::Function c = testcost::shifted_square(1, Vector::Zero(2), 4.0);
  EXPECT_THROW(zo_gradient(c, set, 0, 0, Vector{{1.0, 0.0}}, Vector{{1.0, 0.0}}, 0.1), InvariantViolation);
}

TEST(Smoothing, ValidateCoupling) {
  const ConvexSet box = QuarticProblem::domain();
  EXPECT_NO_THROW((SmoothingParams{1e-3, 0.02}.validate(box)));
  EXPECT_THROW((SmoothingParams{0.1, 0.02}.validate(box)), std::invalid_argument);
  EXPECT_THROW((SmoothingParams{1e-3, 1.0}.validate(box)), std::invalid_argument);
  const SmoothingParams th = SmoothingParams::for_horizon(box, 99);
  EXPECT_DOUBLE_EQ(th.mu, 0.15);
  EXPECT_DOUBLE_EQ(th.xi, 0.1);
}

TEST(Quartic, GlobalSumMatchesPrintedFormula) {
  const QuarticProblem q;
  EXPECT_NEAR(q.global_value(0, Vector{{1.0, 1.0}}), 14.25, 1e-12);
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const Vector x = QuarticProblem::domain().sample(rng);
    const Round t = static_cast<Round>(k * 7);
    EXPECT_NEAR(q.global_value(t, x), oracle::quartic_global(x(0), x(1), static_cast<double>(t)), 1e-10);
  }
}

TEST(Quartic, MinimizerAndStationarity) {
  const QuarticProblem q;
  for (Round t : {0u, 10u, 100u, 2000u}) {
    const Vector xs = *q.analytic_minimizer(t);
    EXPECT_DOUBLE_EQ(xs(0), -2.0);
    EXPECT_DOUBLE_EQ(xs(1), std::atan(static_cast<double>(t) / 10.0));
    EXPECT_NEAR(q.global_subgradient(t, xs).norm(), 0.0, 1e-12);
  }
  const Vector g = q.global_subgradient(0, Vector{{-2.0, 0.7}});
  EXPECT_NEAR(g(0), 0.0, 1e-12);
}

TEST(Quartic, SubgradientsMatchFiniteDifferencesAndBound) {
  const QuarticProblem q;
  Rng rng(6);
  for (int k = 0; k < 200; ++k) {
    const Vector x = QuarticProblem::domain().sample(rng);
    for (std::size_t i = 0; i < q.nodes(); ++i) {
      const auto fd = oracle::central_difference(
          [&](const oracle::Vec& v) { return q.value(i, 30, Vector{{v[0], v[1]}}); }, {x(0), x(1)});
      const Vector g = q.subgradient(i, 30, x);
      EXPECT_NEAR(g(0), fd[0], 1e-5);
      EXPECT_NEAR(g(1), fd[1], 1e-5);
      EXPECT_LE(g.norm(), q.lipschitz());
    }
  }
}

namespace {

TrackingProblem small_tracking(std::uint64_t seed) {
  Rng rng(seed);
  return TrackingProblem(TrackingParams{}, rng, 20.0);
}

}  // namespace

TEST(Tracking, VelocityIsTimeDerivativeOfPosition) {
  const TrackingProblem p = small_tracking(7);
  const double h = 1e-6;
  for (Round t : {0u, 13u, 250u}) {
    const Vector x = p.target_state(t);
    for (std::size_t k = 0; k < 3; ++k) {
      const double w = p.params().omega[k], kap = p.amplitudes()[k], nu = p.phases()[k];
      const double tau = static_cast<double>(t) / 100.0;
      const double deriv = (kap * std::sin(w * (tau + h) + nu) - kap * std::sin(w * (tau - h) + nu)) / (2 * h);
      EXPECT_NEAR(x(static_cast<Eigen::Index>(2 * k + 1)), deriv, 1e-6);
      EXPECT_NEAR(x(static_cast<Eigen::Index>(2 * k)), kap * std::sin(w * tau + nu), 1e-14);
    }
  }
}

TEST(Tracking, NoiselessCostVanishesAtTarget) {
  const TrackingProblem p = small_tracking(8);
  for (Round t = 0; t < 300; t += 37) {
    EXPECT_NEAR(p.global_value(t, p.target_state(t)), 0.0, 1e-20);
    double s = 0.0;
    for (std::size_t i = 0; i < p.nodes(); ++i) s += p.value(i, t, p.target_state(t) + Vector::Ones(6));
    EXPECT_NEAR(s, p.global_value(t, p.target_state(t) + Vector::Ones(6)), 1e-10);
  }
}

TEST(Tracking, ZeroMeasurementsMakeEveryPointOptimal) {
  const TrackingProblem p(TrackingParams{}, {1.0, 2.0, 3.0}, {0.1, 0.2, 0.3}, Matrix::Zero(6, 6), 20.0);
  Rng rng(9);
  for (int k = 0; k < 20; ++k) {
    const Vector x = ConvexSet::ball(Vector::Zero(6), 20.0).sample(rng);
    EXPECT_EQ(p.global_value(5, x), 0.0);
  }
}

TEST(Tracking, SubgradientBound) {
  const TrackingProblem p = small_tracking(10);
  const ConvexSet set = ConvexSet::ball(Vector::Zero(6), 20.0);
  Rng rng(11);
  for (int k = 0; k < 2000; ++k) {
    const Vector x = set.sample(rng);
    for (std::size_t i = 0; i < p.nodes(); ++i) EXPECT_LE(p.subgradient(i, k, x).norm(), p.lipschitz());
  }
}

namespace {

SparseRecoveryProblem small_sparse(std::uint64_t seed, Round rounds = 400) {
  Rng rng(seed);
  return SparseRecoveryProblem(SparseParams{}, rng, rounds, 10.0);
}

}  // namespace

TEST(Sparse, InitialSignalAndNormalization) {
  const SparseRecoveryProblem p = small_sparse(12);
  const Vector& w0 = p.signal(0);
  EXPECT_EQ((w0.array() == 1.0).count(), 2);
  EXPECT_EQ((w0.array() == 0.0).count(), 6);
  for (Round t = 1; t < p.rounds(); ++t) {
    EXPECT_NEAR(p.signal(t).norm(), 1.0, 1e-12);
    EXPECT_EQ(p.support(t).size(), 2u);
    for (Eigen::Index k = 0; k < 8; ++k) {
      const bool in = std::find(p.support(t).begin(), p.support(t).end(), k) != p.support(t).end();
      if (!in) EXPECT_EQ(p.signal(t)(k), 0.0);
    }
  }
  EXPECT_THROW(p.signal(p.rounds()), std::out_of_range);
}

TEST(Sparse, Regularizers) {
  const SparseRecoveryProblem p = small_sparse(13, 5);
  EXPECT_DOUBLE_EQ(p.gamma_reg(), 1.0 / (100.0 * 9.0 * 40.0));
  EXPECT_DOUBLE_EQ(p.sigma_reg(), 1.0 / 60.0);
}

TEST(Sparse, SignRule) {
  Vector x = Vector::Zero(8);
  x(0) = 0.5;
  x(1) = -0.5;
  const Vector s = SparseRecoveryProblem::sign(x);
  EXPECT_EQ(s(0), 1.0);
  EXPECT_EQ(s(1), -1.0);
  for (Eigen::Index k = 2; k < 8; ++k) EXPECT_EQ(s(k), 0.0);
}

TEST(Sparse, LocalAndGlobalViewsAgree) {
  const SparseRecoveryProblem p = small_sparse(14, 50);
  Rng rng(15);
  const ConvexSet set = ConvexSet::ball(Vector::Zero(8), 10.0);
  for (int k = 0; k < 50; ++k) {
    const Vector x = set.sample(rng);
    const Round t = static_cast<Round>(k);
    double s = 0.0;
    Vector g = Vector::Zero(8);
    for (std::size_t i = 0; i < p.nodes(); ++i) {
      s += p.value(i, t, x);
      g += p.subgradient(i, t, x);
      EXPECT_LE(p.subgradient(i, t, x).norm(), p.lipschitz());
    }
    EXPECT_NEAR(s, p.global_value(t, x), 1e-9 * std::max(1.0, s));
    EXPECT_LE((g - p.global_subgradient(t, x)).norm(), 1e-9 * std::max(1.0, g.norm()));
    const auto fd = oracle::central_difference(
        [&](const oracle::Vec& v) {
          return p.global_value(t, Eigen::Map<const Vector>(v.data(), 8)) - p.sigma_reg() * Eigen::Map<const Vector>(v.data(), 8).lpNorm<1>();
        },
        std::vector<double>(x.data(), x.data() + 8));
    for (Eigen::Index k2 = 0; k2 < 8; ++k2) {
      EXPECT_NEAR(p.global_smooth_gradient(t, x)(k2), fd[static_cast<std::size_t>(k2)],
                  1e-4 * std::max(1.0, std::abs(fd[static_cast<std::size_t>(k2)])));
    }
  }
}

TEST(Sparse, SameSeedSameData) {
  const SparseRecoveryProblem a = small_sparse(16, 30), b = small_sparse(16, 30);
  for (Round t = 0; t < 30; ++t) {
    EXPECT_EQ(a.signal(t), b.signal(t));
    EXPECT_EQ(a.observation(t), b.observation(t));
  }
}
