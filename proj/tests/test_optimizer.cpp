#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace gmusic;
using namespace testing_support;

namespace {

struct Quadratic {
  double value(const Point &x) const { return x.squaredNorm(); }
  Eigen::VectorXd gradient(const Point &x) const { return 2.0 * x; }
};

} // namespace

TEST(ThresholdAndCluster, TrivialCases) {
  Grid g = Grid::lattice(Domain::torus(2), {8, 8});
  Eigen::VectorXd v = Eigen::VectorXd::Constant(64, 0.9);
  EXPECT_TRUE(threshold_and_cluster(g, v, 0.5).empty());
  v[19] = 0.1;
  auto cl = threshold_and_cluster(g, v, 0.5);
  ASSERT_EQ(cl.size(), 1u);
  EXPECT_EQ(cl[0].rep_index, 19u);
  EXPECT_EQ(cl[0].size, 1u);
  EXPECT_EQ(cl[0].representative, g.point(19));
}

TEST(ThresholdAndCluster, AdjacencyWrapAndTies) {
  Grid g = Grid::lattice(Domain::torus(2), {8, 8});
  Eigen::VectorXd v = Eigen::VectorXd::Ones(64);
  // diagonal neighbours join; the row-0 and row-7 nodes join through the wrap
  v[g.flat_index({0, 3})] = 0.2;
  v[g.flat_index({7, 4})] = 0.2;
  v[g.flat_index({4, 4})] = 0.3;
  v[g.flat_index({5, 5})] = 0.1;
  auto cl = threshold_and_cluster(g, v, 0.5);
  ASSERT_EQ(cl.size(), 2u);
  EXPECT_EQ(cl[0].size, 2u);
  EXPECT_EQ(cl[0].rep_index, g.flat_index({0, 3})); // tie goes to the lower index
  EXPECT_EQ(cl[1].rep_index, g.flat_index({5, 5}));
  Grid box = Grid::lattice(Domain::box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), {8, 8});
  EXPECT_EQ(threshold_and_cluster(box, v, 0.5).size(), 3u);
}

TEST(ThresholdAndCluster, NoiselessInstanceOneClusterPerAtom) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    KernelGeometry geom = KernelGeometry::cube(32, 2);
    ParameterConfig c = random_separated_config(6, 8.0 / 32.0, AmplitudeLaw::PlusMinusOne, geom.omega, seed);
    MusicEvaluator ev = MusicEvaluator::from_basis(exact_basis(c.theta, geom));
    const double tau = default_tau(geom);
    Grid g = make_uniform_grid(geom.omega, tau);
    auto cl = threshold_and_cluster(g, grid_evaluate(ev, g).values, 0.5);
    ASSERT_EQ(cl.size(), c.s());
    PointSet reps;
    for (const auto &k : cl)
      reps.push_back(k.representative);
    EXPECT_LE(matching_distance(c.theta, reps, geom.omega), tau);
  }
}

TEST(GradientDescent, CriticalPointAndQuadraticContraction) {
  const Domain box = Domain::centered_box(2, 10.0);
  DescentConfig cfg{0.1, 20, 0.0};
  DescentResult r0 = gradient_descent(Quadratic{}, box, Point::Zero(2), cfg);
  EXPECT_EQ(r0.x, Point::Zero(2));
  Point x0(2);
  x0 << 3.0, -4.0;
  DescentResult r = gradient_descent(Quadratic{}, box, x0, cfg, true);
  ASSERT_EQ(r.path.size(), 21u);
  for (std::size_t k = 1; k < r.path.size(); ++k)
    EXPECT_NEAR(r.path[k].norm(), 0.8 * r.path[k - 1].norm(), 1e-14);
  EXPECT_THROW(gradient_descent(Quadratic{}, box, x0, DescentConfig{0.0, 1, 0.0}), InvalidArgument);
}

TEST(GradientDescent, NoiselessContractionAndMonotonicity) {
  KernelGeometry geom = KernelGeometry::cube(16, 2);
  ParameterConfig c = random_separated_config(4, 0.3, AmplitudeLaw::PlusMinusOne, geom.omega, 3);
  MusicEvaluator ev = MusicEvaluator::from_basis(exact_basis(c.theta, geom));
  const double tau = default_tau(geom);
  Hyperparams hp = default_hyperparams(geom, 1e-6);
  std::mt19937_64 rng(4);
  for (const auto &th : c.theta) {
    Point dir = random_point(rng, 2, -1.0, 1.0).normalized();
    Point x0 = geom.omega.canonicalize(th + 0.9 * tau * dir);
    DescentResult r = gradient_descent(ev, x0, DescentConfig{hp.h, 60, 0.0}, true);
    for (std::size_t k = 0; k < r.path.size(); ++k) {
      const double err = geom.omega.distance(r.path[k], th);
      EXPECT_LE(err, 2.0 * tau * std::pow(14.0 / 15.0, static_cast<double>(k)) + 1e-12);
      if (k > 0) {
        EXPECT_LE(r.values[k], r.values[k - 1] + 1e-12);
      }
    }
  }
}

TEST(DefaultHyperparams, StepSizesAndCounts) {
  Hyperparams c = default_hyperparams(KernelGeometry::cube(10, 2), 1e-6);
  EXPECT_NEAR(c.h, 3.0 / (880.0 * pi * pi), 1e-18);
  EXPECT_NEAR(c.mesh_target, 1.0 / (80.0 * pi), 1e-17);
  EXPECT_EQ(c.alpha1, 0.5);
  EXPECT_GE(std::pow(14.0 / 15.0, static_cast<double>(c.n)), 0.0);
  EXPECT_LE(std::pow(14.0 / 15.0, static_cast<double>(c.n)), 1e-6);
  EXPECT_GT(std::pow(14.0 / 15.0, static_cast<double>(c.n - 1)), 1e-6);
  Hyperparams b = default_hyperparams(KernelGeometry::ball(10.0, 2), 1e-6);
  EXPECT_NEAR(b.h, 4.0 / (1600.0 * pi * pi), 1e-18);
  EXPECT_LE(std::pow(13.0 / 14.0, static_cast<double>(b.n)), 1e-6);
  EXPECT_THROW(default_hyperparams(KernelGeometry::cube(4, 1), 0.0), InvalidArgument);
}

TEST(Pipeline, NoiselessRecovery) {
  for (int d = 1; d <= 2; ++d) {
    KernelGeometry geom = KernelGeometry::cube(12, d);
    ParameterConfig c = random_separated_config(3, 3.0 / 12.0, AmplitudeLaw::UnitModulus, geom.omega, 10 + d);
    PipelineOptions opt;
    opt.truth = c;
    opt.record_trajectories = true;
    PipelineReport rep = run_gradient_music(synthesize_samples(c, geom), opt);
    EXPECT_EQ(rep.detected_order, 3);
    ASSERT_EQ(rep.estimates.size(), 3u);
    EXPECT_EQ(rep.initializers.size(), 3u);
    EXPECT_LE(rep.matching_error, 1e-8);
    for (const auto &vals : rep.trajectory_values)
      for (std::size_t k = 1; k < vals.size(); ++k)
        EXPECT_LE(vals[k], vals[k - 1] + 1e-12);
    // amplitudes line up with the matched estimates
    for (std::size_t l = 0; l < 3; ++l) {
      std::size_t j = 0;
      for (std::size_t i = 1; i < 3; ++i)
        if (geom.omega.distance(rep.estimates[i], c.theta[l]) < geom.omega.distance(rep.estimates[j], c.theta[l]))
          j = i;
      EXPECT_LE(std::abs(rep.amplitudes[j] - c.a[l]), 1e-8);
    }
    EXPECT_GT(rep.matvecs, 0);
  }
}

TEST(Pipeline, ZeroSignalAndDeterminism) {
  KernelGeometry geom = KernelGeometry::cube(6, 2);
  SampleSet zero{geom, Eigen::VectorXcd::Zero(25 * 25)};
  PipelineReport z = run_gradient_music(zero);
  EXPECT_EQ(z.detected_order, 0);
  EXPECT_TRUE(z.estimates.empty());

  ParameterConfig c = random_separated_config(3, 0.3, AmplitudeLaw::PlusMinusOne, geom.omega, 2);
  SampleSet y = synthesize_samples(c, geom);
  y.values += sample_noise(NoiseModel::gaussian(0.2), y.sites(), 3);
  PipelineOptions opt;
  opt.seed = 9;
  PipelineReport a = run_gradient_music(y, opt), b = run_gradient_music(y, opt);
  EXPECT_EQ(to_json(a, false).dump(), to_json(b, false).dump());
}
