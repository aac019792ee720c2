#pragma once
// Explicit minimax witnesses: two admissible parameter sets whose data agree
// once one of them is perturbed by admissible noise.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "gmusic/error.hpp"
#include "gmusic/geometry.hpp"
#include "gmusic/kernel.hpp"
#include "gmusic/signal.hpp"

namespace gmusic {

inline double default_minimax_constant(int d) { return 1e-2 / std::pow(4.0, d); }

struct AdversarialPair {
  KernelGeometry geom;
  ParameterConfig config;    // (ϑ, a)
  ParameterConfig alternate; // (ϑ′, a′)
  PointSet sites;            // X⋆ (cube) or the quadrature lattice in B_{2m} (ball)
  Eigen::VectorXcd eta;      // y(ϑ,a) − y(ϑ′,a′) on the sites
  double delta = 0.0;
  double p = 2.0;
  double epsilon = 0.0;
  double beta = 1.0;
  double quadrature_weight = 1.0; // cell volume for ball norms, 1 for the cube
  bool approximate = false;       // norms computed by quadrature

  double norm(double q) const {
    if (eta.size() == 0)
      return 0.0;
    if (std::isinf(q))
      return eta.cwiseAbs().maxCoeff();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
      acc += std::pow(std::abs(eta[i]), q);
    return std::pow(acc * quadrature_weight, 1.0 / q);
  }

  /// Pointwise bound |η| <= mδ(1 + 4π + 4πδ).
  double pointwise_bound() const { return geom.m * delta * (1.0 + 4.0 * pi + 4.0 * pi * delta); }

  /// max |y(ϑ,a) − (y(ϑ′,a′) + η)| relative to max |y(ϑ,a)|.
  double data_residual() const {
    Eigen::VectorXcd y = synthesize(config, sites), y2 = synthesize(alternate, sites);
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    return (y - y2 - eta).cwiseAbs().maxCoeff() / scale;
  }
};

/// θ_1 = 0, θ_j = (2βj/m) e_1 for j = 2..s, a = 1; the alternate moves θ_1 to
/// δe_1 with δ = c_d ε / m^{1+d/p} and sets a′_1 = 1 + mδ.
inline AdversarialPair adversarial_pair(const KernelGeometry &geom, std::size_t s, double beta, double p, double eps,
                                        double c_d = -1.0) {
  require(s >= 2, "adversarial_pair: need s >= 2");
  require(beta >= 1.0, "adversarial_pair: need beta >= 1");
  require(geom.m >= 2.0 * beta * static_cast<double>(s), "adversarial_pair: need m >= 2 beta s");
  require(p >= 1.0, "adversarial_pair: need p >= 1");
  require(eps >= 0.0, "adversarial_pair: need eps >= 0");
  const int d = geom.d;
  const double m = geom.m;
  if (c_d <= 0.0)
    c_d = default_minimax_constant(d);
  const double dp = std::isinf(p) ? 0.0 : d / p;

  AdversarialPair pair;
  pair.geom = geom;
  pair.p = p;
  pair.epsilon = eps;
  pair.beta = beta;
  pair.delta = c_d * eps / std::pow(m, 1.0 + dp);
  if (!(pair.delta <= 1.0 / m))
    throw InvalidArgument("adversarial_pair: delta = " + std::to_string(pair.delta) +
                          " exceeds 1/m; eps too large for c_d (need eps <~ c_d m^{d/p})");
  for (std::size_t j = 0; j < s; ++j) {
    Point t = Point::Zero(d);
    t[0] = 2.0 * beta * static_cast<double>(j) / m;
    pair.config.theta.push_back(t);
    pair.config.a.emplace_back(1.0, 0.0);
  }
  pair.alternate = pair.config;
  pair.alternate.theta[0][0] = pair.delta;
  pair.alternate.a[0] = cplx(1.0 + m * pair.delta, 0.0);

  if (geom.is_cube()) {
    pair.sites = lattice_sites(2 * geom.cube_m(), d);
  } else {
    // quadrature lattice of B_{2m}: cell-centred nodes with spacing m/64
    const double hstep = m / 64.0;
    const long per_axis = 256;
    Grid g = Grid::lattice(Domain::centered_box(d, 2.0 * m), std::vector<long>(static_cast<std::size_t>(d), per_axis));
    for (std::size_t i = 0; i < g.size(); ++i) {
      Point x = g.point(i);
      if (x.norm() <= 2.0 * m)
        pair.sites.push_back(std::move(x));
    }
    pair.quadrature_weight = std::pow(hstep, d);
    pair.approximate = true;
  }
  // η(x) = 1 − a′_1 e^{2πiδx_1}: only the first atom differs
  pair.eta.resize(static_cast<Eigen::Index>(pair.sites.size()));
  for (std::size_t i = 0; i < pair.sites.size(); ++i)
    pair.eta[static_cast<Eigen::Index>(i)] = 1.0 - pair.alternate.a[0] * std::polar(1.0, 2.0 * pi * pair.delta * pair.sites[i][0]);

  const double np = pair.norm(p);
  if (np > eps * (1.0 + 1e-12) + 1e-300)
    throw InvalidArgument("adversarial_pair: noise norm " + std::to_string(np) + " exceeds budget " +
                          std::to_string(eps) + "; decrease c_d");
  return pair;
}

struct StressReport {
  double error_vs_config = 0.0;
  double error_vs_alternate = 0.0;
  double max_error = 0.0;
  double lower_bound = 0.0; // δ/2
  bool pass = false;
};

/// Run an estimator on the shared data y(ϑ,a) = y(ϑ′,a′) + η and confirm that
/// it is at least δ/2 away from one of the two truths.
inline StressReport estimator_stress(const AdversarialPair &pair,
                                     const std::function<PointSet(const SampleSet &)> &estimator) {
  require(pair.geom.is_cube(), "estimator_stress: cube pairs only");
  SampleSet data{pair.geom, synthesize(pair.config, pair.sites)};
  PointSet est = estimator(data);
  auto err = [&](const PointSet &truth) {
    if (est.size() != truth.size())
      return std::numeric_limits<double>::infinity();
    return matching_distance(truth, est, pair.geom.omega);
  };
  StressReport rep;
  rep.error_vs_config = err(pair.config.theta);
  rep.error_vs_alternate = err(pair.alternate.theta);
  rep.max_error = std::max(rep.error_vs_config, rep.error_vs_alternate);
  rep.lower_bound = 0.5 * pair.delta;
  rep.pass = rep.max_error >= rep.lower_bound * (1.0 - 1e-12);
  return rep;
}

} // namespace gmusic
