#pragma once
// Parameter configurations, exponential-sum synthesis, noise, and amplitude recovery.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "gmusic/error.hpp"
#include "gmusic/geometry.hpp"
#include "gmusic/kernel.hpp"

namespace gmusic {

using cplx = std::complex<double>;

struct ParameterConfig {
  PointSet theta;
  std::vector<cplx> a;

  std::size_t s() const { return theta.size(); }

  void validate(const Domain &domain) const {
    require(!theta.empty(), "ParameterConfig: empty configuration");
    require(theta.size() == a.size(), "ParameterConfig: |theta| != |a|");
    for (const auto &t : theta)
      require(domain.contains(t), "ParameterConfig: frequency outside domain");
    for (const auto &v : a)
      require(std::abs(v) > 0.0, "ParameterConfig: amplitudes must be nonzero");
    for (std::size_t j = 0; j < theta.size(); ++j)
      for (std::size_t k = j + 1; k < theta.size(); ++k)
        require(domain.distance(theta[j], theta[k]) > 0.0, "ParameterConfig: duplicate frequency");
  }

  /// Rescale amplitudes so that min |a_ℓ| = 1.
  void normalize() {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto &v : a)
      lo = std::min(lo, std::abs(v));
    require(lo > 0.0 && std::isfinite(lo), "ParameterConfig::normalize: zero amplitude");
    for (auto &v : a)
      v /= lo;
  }
};

/// Integer lattice Q_h ∩ Z^d in canonical order: lexicographic with the first
/// coordinate slowest, each coordinate running -h..h.
inline PointSet lattice_sites(int half_width, int d) {
  require(half_width >= 0 && d >= 1, "lattice_sites: bad arguments");
  const long side = 2L * half_width + 1;
  long total = 1;
  for (int k = 0; k < d; ++k)
    total *= side;
  PointSet out;
  out.reserve(static_cast<std::size_t>(total));
  for (long i = 0; i < total; ++i) {
    Point p(d);
    long r = i;
    for (int k = d - 1; k >= 0; --k) {
      p[k] = static_cast<double>(r % side - half_width);
      r /= side;
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// Samples of a cube-geometry signal on X⋆ = Q_{2m} ∩ Z^d in canonical order.
struct SampleSet {
  KernelGeometry geom;
  Eigen::VectorXcd values;

  PointSet sites() const { return lattice_sites(2 * geom.cube_m(), geom.d); }

  void validate() const {
    require(geom.is_cube(), "SampleSet: only cube geometries carry discrete samples");
    const double expected = std::pow(static_cast<double>(geom.star_side()), geom.d);
    require(static_cast<double>(values.size()) == expected,
            "SampleSet: expected " + std::to_string(static_cast<long>(expected)) + " samples on X*, got " +
                std::to_string(values.size()));
  }
};

/// y(x) = Σ_ℓ a_ℓ e^{2πi θ_ℓ·x}.
inline Eigen::VectorXcd synthesize(const ParameterConfig &config, const PointSet &sites) {
  require(config.theta.size() == config.a.size(), "synthesize: |theta| != |a|");
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sites.size()));
  for (std::size_t l = 0; l < config.theta.size(); ++l) {
    const Point &th = config.theta[l];
    for (std::size_t i = 0; i < sites.size(); ++i) {
      require(sites[i].size() == th.size(), "synthesize: dimension mismatch");
      y[static_cast<Eigen::Index>(i)] += config.a[l] * std::polar(1.0, 2.0 * pi * th.dot(sites[i]));
    }
  }
  return y;
}

inline SampleSet synthesize_samples(const ParameterConfig &config, const KernelGeometry &geom) {
  require(geom.is_cube(), "synthesize_samples: cube geometry required");
  SampleSet out{geom, synthesize(config, lattice_sites(2 * geom.cube_m(), geom.d))};
  return out;
}

struct NoiseModel {
  enum class Kind { None, Adversarial, Gaussian };

  Kind kind = Kind::None;
  Eigen::VectorXcd values;                   // Adversarial
  double sigma0 = 0.0;                       // Gaussian: σ(x) = σ0 (1+|x|)^r
  double r = 0.0;
  std::function<double(const Point &)> profile; // overrides the r-exponent shortcut when set
  bool real_parts_unit_variance = false;     // Re, Im ~ N(0,1) instead of N(0,1/2)

  static NoiseModel none() { return {}; }

  static NoiseModel adversarial(Eigen::VectorXcd v) {
    NoiseModel n;
    n.kind = Kind::Adversarial;
    n.values = std::move(v);
    return n;
  }

  static NoiseModel gaussian(double sigma0, double r = 0.0) {
    NoiseModel n;
    n.kind = Kind::Gaussian;
    n.sigma0 = sigma0;
    n.r = r;
    return n;
  }

  double sigma(const Point &x) const {
    if (profile)
      return profile(x);
    return sigma0 * std::pow(1.0 + x.norm(), r);
  }
};

/// Noise values per site. Gaussian noise is i.i.d. complex normal scaled by σ(x),
/// deterministic given the seed.
inline Eigen::VectorXcd sample_noise(const NoiseModel &model, const PointSet &sites, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  switch (model.kind) {
  case NoiseModel::Kind::None:
    return Eigen::VectorXcd::Zero(n);
  case NoiseModel::Kind::Adversarial:
    require(model.values.size() == n, "sample_noise: adversarial noise length mismatch");
    return model.values;
  case NoiseModel::Kind::Gaussian:
    break;
  }
  require(model.sigma0 >= 0.0, "sample_noise: negative sigma");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double part = model.real_parts_unit_variance ? 1.0 : std::sqrt(0.5);
  Eigen::VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sig = model.sigma(sites[static_cast<std::size_t>(i)]);
    require(sig >= 0.0, "sample_noise: negative sigma profile");
    const double re = normal(rng), im = normal(rng);
    out[i] = sig * part * cplx(re, im);
  }
  return out;
}

enum class AmplitudeLaw { PlusMinusOne, UnitModulus, Given };

/// Random configuration with min_separation ≥ Δmin by sequential dart throwing,
/// restarted on failure.
inline ParameterConfig random_separated_config(std::size_t s, double min_sep, AmplitudeLaw law, const Domain &domain,
                                               std::uint64_t seed, const std::vector<cplx> &given = {},
                                               long budget = 200000) {
  require(s >= 1, "random_separated_config: s must be positive");
  if (law == AmplitudeLaw::Given)
    require(given.size() == s, "random_separated_config: need s given amplitudes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = domain.dim();
  auto draw = [&] {
    Point p(d);
    for (int k = 0; k < d; ++k)
      p[k] = domain.is_torus() ? unit(rng) : domain.lower()[k] + unit(rng) * domain.extent()[k];
    return domain.canonicalize(p);
  };
  ParameterConfig cfg;
  long attempts = 0;
  while (cfg.theta.size() < s) {
    if (++attempts > budget)
      throw InvalidArgument("random_separated_config: rejection budget exhausted placing " + std::to_string(s) +
                            " points with separation " + std::to_string(min_sep));
    Point p = draw();
    bool ok = true;
    for (const auto &q : cfg.theta)
      if (domain.distance(p, q) < min_sep) {
        ok = false;
        break;
      }
    if (ok) {
      cfg.theta.push_back(std::move(p));
    } else if (attempts % 2000 == 0) {
      cfg.theta.clear(); // a dense early placement can block the rest
    }
  }
  for (std::size_t l = 0; l < s; ++l) {
    switch (law) {
    case AmplitudeLaw::PlusMinusOne:
      cfg.a.emplace_back(unit(rng) < 0.5 ? -1.0 : 1.0, 0.0);
      break;
    case AmplitudeLaw::UnitModulus:
      cfg.a.push_back(std::polar(1.0, 2.0 * pi * unit(rng)));
      break;
    case AmplitudeLaw::Given:
      cfg.a.push_back(given[l]);
      break;
    }
  }
  return cfg;
}

/// Least-squares amplitudes for fixed frequencies on X⋆. Columns are scaled to
/// unit norm for the conditioning guard.
inline std::vector<cplx> estimate_amplitudes(const PointSet &theta_hat, const SampleSet &samples,
                                             double cond_tol = 1e-8) {
  samples.validate();
  if (theta_hat.empty())
    return {};
  const PointSet sites = samples.sites();
  const auto n = static_cast<Eigen::Index>(sites.size());
  const auto s = static_cast<Eigen::Index>(theta_hat.size());
  Eigen::MatrixXcd A(n, s);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index l = 0; l < s; ++l)
    for (Eigen::Index i = 0; i < n; ++i)
      A(i, l) = scale * std::polar(1.0, 2.0 * pi * theta_hat[static_cast<std::size_t>(l)].dot(sites[static_cast<std::size_t>(i)]));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  Eigen::MatrixXcd R = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
  const double smin = svd.singularValues()(s - 1);
  if (!(smin >= cond_tol))
    throw IllConditioned("estimate_amplitudes: synthesis system ill-conditioned, smallest singular value " +
                             std::to_string(smin),
                         smin);
  Eigen::VectorXcd x = qr.solve(samples.values) * scale;
  return std::vector<cplx>(x.data(), x.data() + s);
}

} // namespace gmusic
