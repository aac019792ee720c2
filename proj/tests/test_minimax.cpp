#include <gtest/gtest.h>

#include <limits>

#include "support.hpp"

using namespace gmusic;

namespace {

double direct_norm(const Eigen::VectorXcd &v, double p) {
  if (std::isinf(p))
    return v.cwiseAbs().maxCoeff();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    acc += std::pow(std::abs(v[i]), p);
  return std::pow(acc, 1.0 / p);
}

} // namespace

TEST(AdversarialPair, WorkedExample) {
  const double inf = std::numeric_limits<double>::infinity();
  AdversarialPair pair = adversarial_pair(KernelGeometry::cube(16, 2), 2, 1.0, inf, 0.1, 0.01);
  EXPECT_NEAR(pair.delta, 6.25e-5, 1e-18);
  EXPECT_LE(pair.data_residual(), 1e-12);
  EXPECT_EQ(pair.sites.size(), 65u * 65u);
  EXPECT_DOUBLE_EQ(pair.alternate.theta[0][0] - pair.config.theta[0][0], pair.delta);
  EXPECT_NEAR(std::abs(pair.alternate.a[0] - pair.config.a[0]), 16.0 * pair.delta, 1e-15);
  EXPECT_LE(pair.eta.cwiseAbs().maxCoeff(), pair.pointwise_bound());
  EXPECT_LE(pair.norm(inf), 0.1);
}

TEST(AdversarialPair, ZeroBudgetGivesIdenticalConfigs) {
  AdversarialPair pair = adversarial_pair(KernelGeometry::cube(8, 1), 3, 1.0, 2.0, 0.0);
  EXPECT_EQ(pair.delta, 0.0);
  EXPECT_EQ(pair.eta.cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(pair.config.theta[j], pair.alternate.theta[j]);
    EXPECT_EQ(pair.config.a[j], pair.alternate.a[j]);
  }
}

TEST(AdversarialPair, NormsSeparationAndResidualAcrossGrid) {
  const double inf = std::numeric_limits<double>::infinity();
  for (int d = 1; d <= 3; ++d)
    for (int m : {8, 16})
      for (double p : {1.0, 2.0, inf}) {
        const double beta = 2.0, eps = 0.5;
        AdversarialPair pair = adversarial_pair(KernelGeometry::cube(m, d), 2, beta, p, eps);
        SCOPED_TRACE(testing::Message() << "d=" << d << " m=" << m << " p=" << p);
        EXPECT_LE(pair.data_residual(), 1e-12);
        const double n = direct_norm(pair.eta, p);
        EXPECT_NEAR(pair.norm(p), n, 1e-12 * std::max(1.0, n));
        EXPECT_LE(n, eps);
        EXPECT_LE(pair.eta.cwiseAbs().maxCoeff(), pair.pointwise_bound());
        const Domain &om = pair.geom.omega;
        EXPECT_GE(min_separation(pair.config.theta, om), beta / m - 1e-15);
        EXPECT_GE(min_separation(pair.alternate.theta, om), beta / m - 1e-15);
      }
}

TEST(AdversarialPair, BallQuadrature) {
  AdversarialPair pair = adversarial_pair(KernelGeometry::ball(4.0, 2), 2, 1.0, 2.0, 0.2);
  EXPECT_TRUE(pair.approximate);
  EXPECT_DOUBLE_EQ(pair.quadrature_weight, (4.0 / 64.0) * (4.0 / 64.0));
  for (const auto &x : pair.sites)
    EXPECT_LE(x.norm(), 8.0);
  // the sampled disc has area close to π(2m)²
  EXPECT_NEAR(static_cast<double>(pair.sites.size()) * pair.quadrature_weight, pi * 64.0, 0.02 * pi * 64.0);
  EXPECT_LE(pair.data_residual(), 1e-12);
  EXPECT_LE(pair.norm(2.0), 0.2);
}

TEST(AdversarialPair, Errors) {
  KernelGeometry g = KernelGeometry::cube(16, 2);
  EXPECT_THROW(adversarial_pair(g, 1, 1.0, 2.0, 0.1), InvalidArgument);
  EXPECT_THROW(adversarial_pair(g, 2, 0.5, 2.0, 0.1), InvalidArgument);
  EXPECT_THROW(adversarial_pair(g, 4, 4.0, 2.0, 0.1), InvalidArgument);
  EXPECT_THROW(adversarial_pair(g, 2, 1.0, 0.5, 0.1), InvalidArgument);
  EXPECT_THROW(adversarial_pair(g, 2, 1.0, 2.0, -0.1), InvalidArgument);
  // δ > 1/m
  EXPECT_THROW(adversarial_pair(g, 2, 1.0, std::numeric_limits<double>::infinity(), 100.0, 1.0), InvalidArgument);
  // ‖η‖₁ over (4m+1)² sites exceeds ε when c_d = 1
  EXPECT_THROW(adversarial_pair(g, 2, 1.0, 1.0, 0.1, 1.0), InvalidArgument);
}

TEST(EstimatorStress, GradientMusicOnPair) {
  AdversarialPair pair = adversarial_pair(KernelGeometry::cube(32, 2), 2, 4.0, 2.0, 1.0);
  StressReport rep = estimator_stress(pair, [](const SampleSet &y) { return run_gradient_music(y).estimates; });
  EXPECT_TRUE(rep.pass);
  EXPECT_DOUBLE_EQ(rep.lower_bound, 0.5 * pair.delta);
  EXPECT_GE(rep.max_error, rep.lower_bound);
  // the data equal y(ϑ,a) exactly, so the estimate sits on ϑ and the alternate is δ away
  EXPECT_LE(rep.error_vs_config, 1e-8);
  EXPECT_NEAR(rep.error_vs_alternate, pair.delta, 1e-8);
}

TEST(EstimatorStress, DegenerateAndWrongOrder) {
  AdversarialPair zero = adversarial_pair(KernelGeometry::cube(8, 1), 2, 1.0, 2.0, 0.0);
  StressReport r0 = estimator_stress(zero, [&](const SampleSet &) { return zero.config.theta; });
  EXPECT_EQ(r0.error_vs_config, r0.error_vs_alternate);
  EXPECT_TRUE(r0.pass);
  StressReport r1 = estimator_stress(zero, [](const SampleSet &) { return PointSet{}; });
  EXPECT_TRUE(std::isinf(r1.max_error));
  AdversarialPair ball = adversarial_pair(KernelGeometry::ball(4.0, 1), 2, 1.0, 2.0, 0.1);
  EXPECT_THROW(estimator_stress(ball, [](const SampleSet &) { return PointSet{}; }), InvalidArgument);
}
