#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace gmusic;
using namespace testing_support;

namespace {

SampleSet random_samples(const KernelGeometry &g, std::uint64_t seed) {
  SampleSet s;
  s.geom = g;
  s.values = sample_noise(NoiseModel::gaussian(1.0), lattice_sites(2 * g.cube_m(), g.d), seed);
  return s;
}

Eigen::VectorXcd random_vector(Eigen::Index n, std::mt19937_64 &rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = cplx(nd(rng), nd(rng));
  return v;
}

// index oracle: entry (j,k) is the sample at x_j + x_k, located by coordinates
Eigen::MatrixXcd dense_oracle(const SampleSet &s) {
  const int m = s.geom.cube_m(), d = s.geom.d;
  const PointSet X = lattice_sites(m, d), Xs = lattice_sites(2 * m, d);
  Eigen::MatrixXcd H(static_cast<Eigen::Index>(X.size()), static_cast<Eigen::Index>(X.size()));
  for (std::size_t j = 0; j < X.size(); ++j)
    for (std::size_t k = 0; k < X.size(); ++k) {
      const Point z = X[j] + X[k];
      auto it = std::find(Xs.begin(), Xs.end(), z);
      H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = s.values[it - Xs.begin()];
    }
  return H;
}

Eigen::MatrixXcd projector(const SubspaceBasis &b) { return b.columns * b.columns.adjoint(); }

double spectral_norm(const Eigen::MatrixXcd &A) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  return svd.singularValues()(0);
}

} // namespace

TEST(Hankel, SmallExplicitEntries) {
  KernelGeometry g = KernelGeometry::cube(1, 1);
  SampleSet s{g, Eigen::VectorXcd(5)};
  s.values << 1.0, 2.0, 3.0, 4.0, 5.0; // y(-2..2)
  HankelOperator H(s);
  Eigen::MatrixXcd want(3, 3);
  want << 1, 2, 3, 2, 3, 4, 3, 4, 5;
  EXPECT_EQ((H.dense() - want).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(H.entry(1, 2), H.entry(2, 1));
}

TEST(Hankel, DenseMatchesIndexOracle) {
  for (int d = 1; d <= 2; ++d)
    for (int m = 1; m <= 4; ++m) {
      SampleSet s = random_samples(KernelGeometry::cube(m, d), 10 * d + m);
      EXPECT_EQ((HankelOperator(s).dense() - dense_oracle(s)).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Hankel, ConstantSamplesGiveRankOne) {
  KernelGeometry g = KernelGeometry::cube(3, 2);
  SampleSet s{g, Eigen::VectorXcd::Ones(13 * 13)};
  HankelOperator H(s);
  EXPECT_EQ((H.dense() - Eigen::MatrixXcd::Ones(49, 49)).cwiseAbs().maxCoeff(), 0.0);
  auto spec = truncated_svd(H, 3, 1e-10, 1);
  EXPECT_NEAR(spec.values(0), 49.0, 1e-10);
  EXPECT_LE(spec.values(1), 1e-10);
}

TEST(Hankel, MatvecMatchesDense) {
  std::mt19937_64 rng(3);
  std::vector<std::pair<int, int>> cases;
  for (int d = 1; d <= 2; ++d)
    for (int m = 1; m <= 4; ++m)
      cases.emplace_back(d, m);
  cases.emplace_back(1, 31);
  for (auto [d, m] : cases) {
    SampleSet s = random_samples(KernelGeometry::cube(m, d), 100 + m);
    HankelOperator H(s);
    Eigen::MatrixXcd D = H.dense();
    EXPECT_EQ(H.apply(Eigen::VectorXcd(Eigen::VectorXcd::Zero(H.size()))).norm(), 0.0);
    for (int t = 0; t < 50; ++t) {
      Eigen::VectorXcd v = random_vector(H.size(), rng), w = random_vector(H.size(), rng);
      Eigen::VectorXcd want = D * v;
      EXPECT_LE((H.apply(v) - want).norm() / want.norm(), 1e-10);
      // ⟨Hv, w⟩ = ⟨v, H*w⟩
      EXPECT_LE(std::abs(w.dot(H.apply(v)) - H.apply_adjoint(w).dot(v)), 1e-10 * v.norm() * w.norm() * D.norm());
    }
  }
}

TEST(Hankel, LinearInSamples) {
  std::mt19937_64 rng(4);
  KernelGeometry g = KernelGeometry::cube(5, 2);
  SampleSet y = random_samples(g, 1), e = random_samples(g, 2);
  SampleSet sum{g, y.values + e.values};
  HankelOperator Hy(y), He(e), Hs(sum);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXcd v = random_vector(Hy.size(), rng);
    EXPECT_LE((Hs.apply(v) - Hy.apply(v) - He.apply(v)).norm(), 1e-12 * v.norm() * std::sqrt(Hy.size()) * 10);
  }
}

TEST(TruncatedSvd, MatchesDenseSvd) {
  for (int d = 1; d <= 2; ++d)
    for (int m = 1; m <= 4; ++m) {
      SampleSet s = random_samples(KernelGeometry::cube(m, d), 200 + m);
      HankelOperator H(s);
      const Eigen::Index k = std::min<Eigen::Index>(H.size(), 6);
      auto spec = truncated_svd(H, k, 1e-10, 7);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H.dense());
      for (Eigen::Index i = 0; i < k; ++i) {
        EXPECT_LE(rel_err(spec.values(i), svd.singularValues()(i), 1e-300), 1e-9) << "d=" << d << " m=" << m;
        EXPECT_LE(spec.residuals[static_cast<std::size_t>(i)], 1e-10 * spec.values(0) * 1.0001);
      }
      for (Eigen::Index i = 1; i < k; ++i)
        EXPECT_GE(spec.values(i - 1), spec.values(i));
    }
}

TEST(TruncatedSvd, NoiselessRankAndSigmaBounds) {
  KernelGeometry g = KernelGeometry::cube(4, 2);
  ParameterConfig c = random_separated_config(3, 0.25, AmplitudeLaw::PlusMinusOne, g.omega, 5);
  SampleSet y = synthesize_samples(c, g);
  auto spec = truncated_svd(HankelOperator(y), 6, 1e-10, 1);
  EXPECT_LE(spec.values(3) / spec.values(0), 1e-8);
  Eigen::JacobiSVD<Eigen::MatrixXcd> st(synthesis_matrix(c.theta, g));
  const double smin = st.singularValues()(2), smax = st.singularValues()(0);
  EXPECT_GE(spec.values(2), smin * smin * (1.0 - 1e-10));
  EXPECT_LE(spec.values(0), smax * smax * (1.0 + 1e-10)); // |a|_∞ = 1
}

TEST(DetectModelOrder, Examples) {
  KernelGeometry g = KernelGeometry::cube(6, 2);
  ParameterConfig c = random_separated_config(4, 0.2, AmplitudeLaw::UnitModulus, g.omega, 8);
  auto spec = truncated_svd(HankelOperator(synthesize_samples(c, g)), 8, 1e-10, 2);
  EXPECT_EQ(detect_model_order(spec, 1e-6), 4);
  EXPECT_EQ(detect_model_order(spec, 1.0), 1);
  SampleSet zero{g, Eigen::VectorXcd::Zero(25 * 25)};
  EXPECT_EQ(detect_model_order(truncated_svd(HankelOperator(zero), 3, 1e-10, 0), 0.1), 0);
}

TEST(ExactBasis, SpanGramAndSingleAtom) {
  KernelGeometry g = KernelGeometry::cube(3, 2);
  Point th(2);
  th << 0.3, 0.8;
  SubspaceBasis one = exact_basis({th}, g);
  Eigen::MatrixXcd T = synthesis_matrix({th}, g) / 7.0;
  EXPECT_NEAR(std::abs(one.columns.col(0).dot(T.col(0))), 1.0, 1e-12);

  ParameterConfig c = random_separated_config(4, 0.2, AmplitudeLaw::PlusMinusOne, g.omega, 3);
  SubspaceBasis U = exact_basis(c.theta, g);
  EXPECT_LE(U.orthonormality_error(), 1e-12);
  Eigen::MatrixXcd Tc = synthesis_matrix(c.theta, g);
  Eigen::MatrixXcd phi = Tc / std::sqrt(static_cast<double>(Tc.rows()));
  EXPECT_LE((projector(U) * phi - phi).cwiseAbs().maxCoeff(), 1e-10);
  Eigen::MatrixXcd gram = Tc.adjoint() * Tc / g.measure();
  EXPECT_LE((gram.real() - kernel_matrix(c.theta, g).K).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(gram.imag().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SubspaceDistance, ExamplesAndProjectorOracle) {
  KernelGeometry g = KernelGeometry::cube(3, 1);
  std::mt19937_64 rng(6);
  auto random_basis = [&](Eigen::Index k) {
    Eigen::MatrixXcd M(7, k);
    for (Eigen::Index j = 0; j < k; ++j)
      M.col(j) = random_vector(7, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
    return SubspaceBasis{g, Eigen::MatrixXcd(qr.householderQ() * Eigen::MatrixXcd::Identity(7, k))};
  };
  SubspaceBasis A = random_basis(3);
  EXPECT_LE(subspace_distance(A, A), 1e-7);
  SubspaceBasis e0{g, Eigen::MatrixXcd::Identity(7, 7).col(0)}, e1{g, Eigen::MatrixXcd::Identity(7, 7).col(1)};
  EXPECT_NEAR(subspace_distance(e0, e1), 1.0, 1e-15);
  EXPECT_EQ(subspace_distance(A, random_basis(2)), 1.0);
  for (int t = 0; t < 20; ++t) {
    SubspaceBasis B = random_basis(3), C = random_basis(3);
    const double want = spectral_norm(projector(B) - projector(C));
    EXPECT_LE(rel_err(subspace_distance(B, C), want, 1e-300), 1e-9);
  }
}

TEST(SubspaceDistance, NoiselessEstimateEqualsExact) {
  KernelGeometry g = KernelGeometry::cube(8, 2);
  ParameterConfig c = random_separated_config(5, 1.0 / 8.0, AmplitudeLaw::PlusMinusOne, g.omega, 4);
  auto spec = truncated_svd(HankelOperator(synthesize_samples(c, g)), 9, 1e-10, 3);
  EXPECT_LE(subspace_distance(spec.left_basis(g, 5), exact_basis(c.theta, g)), 1e-7);
}

TEST(WedinAudit, ZeroNoiseAndSmallNoise) {
  KernelGeometry g = KernelGeometry::cube(4, 2);
  ParameterConfig c = random_separated_config(3, 0.25, AmplitudeLaw::PlusMinusOne, g.omega, 9);
  SampleSet y = synthesize_samples(c, g);
  SampleSet none{g, Eigen::VectorXcd::Zero(y.values.size())};
  WedinReport z = wedin_audit(y, none, 3);
  EXPECT_TRUE(z.pass);
  EXPECT_LE(z.projector_gap, 1e-10);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SampleSet eta{g, sample_noise(NoiseModel::gaussian(0.05), y.sites(), seed)};
    WedinReport w = wedin_audit(y, eta, 3);
    EXPECT_TRUE(w.dense);
    EXPECT_TRUE(w.hypothesis_holds);
    EXPECT_TRUE(w.pass);
    EXPECT_LE(w.projector_gap, w.projector_bound);
    // independent spectral norm of the dense noise operator against the ℓ^p bounds
    const double hn = spectral_norm(HankelOperator(eta).dense());
    EXPECT_NEAR(hn, w.noise_norm, 1e-10 * hn);
    EXPECT_LE(hn, eta.values.cwiseAbs().sum());
    EXPECT_LE(hn, 17.0 * eta.values.norm());
    EXPECT_LE(hn, 289.0 * eta.values.cwiseAbs().maxCoeff());
  }
}

TEST(WedinAudit, GaussianNoiseOperatorNorm) {
  const int m = 8, d = 2;
  KernelGeometry g = KernelGeometry::cube(m, d);
  const double sigma = 1.0;
  std::vector<double> norms;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SampleSet eta{g, sample_noise(NoiseModel::gaussian(sigma), lattice_sites(2 * m, d), seed)};
    norms.push_back(truncated_svd(HankelOperator(eta), 1, 1e-9, seed).values(0));
  }
  std::sort(norms.begin(), norms.end());
  const double median = 0.5 * (norms[24] + norms[25]);
  const double ones = std::pow(4.0 * m + 1.0, d / 2.0);
  EXPECT_LE(median, sigma * ones * std::sqrt(2.0 * d * std::log(static_cast<double>(m))));
}
