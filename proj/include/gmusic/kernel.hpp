#pragma once
// Measurement kernels for the cube lattice (tensor Dirichlet) and the ball
// (radial Bessel profile), their derivatives, and the quantities the
// landscape certificate consumes.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gmusic/error.hpp"
#include "gmusic/geometry.hpp"

namespace gmusic {

inline constexpr double pi = std::numbers::pi;

/// Sampling model: X = Q_m ∩ Z^d with counting measure, or X = B_m with Lebesgue measure.
struct KernelGeometry {
  enum class Kind { Cube, Ball };

  Kind kind = Kind::Cube;
  double m = 1.0;
  int d = 1;
  Domain omega = Domain::torus(1);

  static KernelGeometry cube(int m, int d) {
    require(m >= 1, "KernelGeometry::cube: m must be a positive integer");
    require(d >= 1, "KernelGeometry::cube: d must be positive");
    return {Kind::Cube, static_cast<double>(m), d, Domain::torus(d)};
  }

  /// Ball geometry; the parameter domain defaults to the unit box [0,1]^d.
  static KernelGeometry ball(double m, int d) {
    require(m > 0.0 && std::isfinite(m), "KernelGeometry::ball: m must be positive");
    require(d >= 1, "KernelGeometry::ball: d must be positive");
    return {Kind::Ball, m, d, Domain::box(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d))};
  }

  bool is_cube() const { return kind == Kind::Cube; }
  int cube_m() const { return static_cast<int>(std::lround(m)); }
  /// Points of X per axis (cube only).
  int side() const { return 2 * cube_m() + 1; }
  /// Points of X⋆ per axis (cube only).
  int star_side() const { return 4 * cube_m() + 1; }

  /// ν(X): (2m+1)^d for the cube, |B_1| m^d for the ball.
  double measure() const;

  std::string name() const { return is_cube() ? "cube" : "ball"; }
};

inline double unit_ball_volume(int d) {
  return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline double KernelGeometry::measure() const {
  return is_cube() ? std::pow(2.0 * m + 1.0, d) : unit_ball_volume(d) * std::pow(m, d);
}

// ---------------------------------------------------------------------------
// One-dimensional Dirichlet kernel

namespace detail {

// (1/n) Σ_{k=-m}^{m} k^{2j}, j = 0..J-1
template <int J> std::array<double, J> dirichlet_moments(int m) {
  std::array<double, J> out{};
  const double n = 2.0 * m + 1.0;
  for (int k = 1; k <= m; ++k) {
    double k2 = static_cast<double>(k) * k, p = 1.0;
    for (int j = 0; j < J; ++j) {
      out[j] += 2.0 * p;
      p *= k2;
    }
  }
  out[0] += 1.0;
  for (auto &v : out)
    v /= n;
  return out;
}

} // namespace detail

/// d_m(t) = sin((2m+1)πt) / ((2m+1) sin πt) and its first two derivatives.
/// The function is 1-periodic; near integers a Taylor branch replaces the 0/0 form.
inline double dirichlet_1d(double t, int m, int order = 0) {
  require(m >= 1, "dirichlet_1d: m must be positive");
  require(order >= 0 && order <= 2, "dirichlet_1d: order must be 0, 1 or 2");
  const double n = 2.0 * m + 1.0;
  const double u = wrap_centered(t);
  if (std::abs(pi * n * u) < 0.5) {
    // f(u) = Σ_j (-1)^j (2πu)^{2j} M_{2j} / (2j)!
    constexpr int J = 16;
    const auto M = detail::dirichlet_moments<J>(m);
    const double w = 2.0 * pi * u;
    double sum = 0.0, fact = 1.0, sign = 1.0;
    for (int j = 0; j < J; ++j) {
      const int p = 2 * j;
      if (j > 0) {
        fact *= static_cast<double>(p) * (p - 1);
        sign = -sign;
      }
      double coeff = sign * M[j] / fact;
      if (order == 0) {
        sum += coeff * std::pow(w, p);
      } else if (order == 1) {
        if (p >= 1)
          sum += coeff * p * std::pow(w, p - 1) * 2.0 * pi;
      } else if (p >= 2) {
        sum += coeff * p * (p - 1) * std::pow(w, p - 2) * 4.0 * pi * pi;
      }
    }
    return sum;
  }
  const double A = n * pi;
  const double N = std::sin(A * u), N1 = A * std::cos(A * u), N2 = -A * A * N;
  const double D = n * std::sin(pi * u), D1 = n * pi * std::cos(pi * u), D2 = -pi * pi * D;
  const double f = N / D;
  if (order == 0)
    return f;
  const double f1 = (N1 - f * D1) / D;
  if (order == 1)
    return f1;
  return (N2 - 2.0 * f1 * D1 - f * D2) / D;
}

/// D_m(ξ) = Π_j d_m(ξ_j).
inline double cube_kernel_value(const Point &xi, int m) {
  double v = 1.0;
  for (Eigen::Index j = 0; j < xi.size(); ++j)
    v *= dirichlet_1d(xi[j], m, 0);
  return v;
}

inline Eigen::VectorXd cube_kernel_gradient(const Point &xi, int m) {
  const Eigen::Index d = xi.size();
  Eigen::VectorXd f0(d), f1(d), g(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    f0[j] = dirichlet_1d(xi[j], m, 0);
    f1[j] = dirichlet_1d(xi[j], m, 1);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    double p = f1[j];
    for (Eigen::Index k = 0; k < d; ++k)
      if (k != j)
        p *= f0[k];
    g[j] = p;
  }
  return g;
}

inline Eigen::MatrixXd cube_kernel_hessian(const Point &xi, int m) {
  const Eigen::Index d = xi.size();
  Eigen::VectorXd f0(d), f1(d), f2(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    f0[j] = dirichlet_1d(xi[j], m, 0);
    f1[j] = dirichlet_1d(xi[j], m, 1);
    f2[j] = dirichlet_1d(xi[j], m, 2);
  }
  Eigen::MatrixXd H(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = j; k < d; ++k) {
      double p = 1.0;
      for (Eigen::Index i = 0; i < d; ++i) {
        if (i == j && i == k)
          p *= f2[i];
        else if (i == j || i == k)
          p *= f1[i];
        else
          p *= f0[i];
      }
      H(j, k) = H(k, j) = p;
    }
  return H;
}

// ---------------------------------------------------------------------------
// Ball kernel W_m(ξ) = (1/|B_1|) J_{d/2}(2πm|ξ|) / (m|ξ|)^{d/2}

/// g_μ(t) = J_μ(t) / t^μ, continuous at t = 0.
inline double bessel_ratio(double mu, double t) {
  t = std::abs(t);
  if (t < 4.0) {
    const double q = -0.25 * t * t;
    double term = 1.0 / std::tgamma(mu + 1.0), sum = term;
    for (int k = 1; k < 40; ++k) {
      term *= q / (k * (k + mu));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum))
        break;
    }
    return sum / std::pow(2.0, mu);
  }
  return std::cyl_bessel_j(mu, t) / std::pow(t, mu);
}

namespace detail {

struct BallScale {
  double nu, a, C;
};

inline BallScale ball_scale(double m, int d) {
  const double nu = 0.5 * d;
  return {nu, 2.0 * pi * m, std::pow(2.0 * pi, nu) / unit_ball_volume(d)};
}

} // namespace detail

inline double ball_kernel_value(const Point &xi, double m) {
  const double r = xi.norm();
  if (r == 0.0)
    return 1.0; // C g_ν(0) = 1 analytically; skip the rounding
  const auto s = detail::ball_scale(m, static_cast<int>(xi.size()));
  return s.C * bessel_ratio(s.nu, s.a * r);
}

inline Eigen::VectorXd ball_kernel_gradient(const Point &xi, double m) {
  const auto s = detail::ball_scale(m, static_cast<int>(xi.size()));
  return -s.C * s.a * s.a * bessel_ratio(s.nu + 1.0, s.a * xi.norm()) * xi;
}

inline Eigen::MatrixXd ball_kernel_hessian(const Point &xi, double m) {
  const auto s = detail::ball_scale(m, static_cast<int>(xi.size()));
  const double t = s.a * xi.norm();
  const Eigen::Index d = xi.size();
  Eigen::MatrixXd H = -s.C * s.a * s.a * bessel_ratio(s.nu + 1.0, t) * Eigen::MatrixXd::Identity(d, d);
  H += s.C * std::pow(s.a, 4) * bessel_ratio(s.nu + 2.0, t) * (xi * xi.transpose());
  return H;
}

// ---------------------------------------------------------------------------
// Geometry dispatch

/// Kernel argument ω − θ: wrapped on the torus, plain difference on a box.
inline Point kernel_argument(const KernelGeometry &geom, const Point &omega, const Point &theta) {
  return geom.omega.displacement(omega, theta);
}

inline double kernel_value(const KernelGeometry &geom, const Point &xi) {
  require(xi.size() == geom.d, "kernel_value: dimension mismatch");
  return geom.is_cube() ? cube_kernel_value(xi, geom.cube_m()) : ball_kernel_value(xi, geom.m);
}

inline Eigen::VectorXd kernel_gradient(const KernelGeometry &geom, const Point &xi) {
  require(xi.size() == geom.d, "kernel_gradient: dimension mismatch");
  return geom.is_cube() ? cube_kernel_gradient(xi, geom.cube_m()) : ball_kernel_gradient(xi, geom.m);
}

inline Eigen::MatrixXd kernel_hessian(const KernelGeometry &geom, const Point &xi) {
  require(xi.size() == geom.d, "kernel_hessian: dimension mismatch");
  return geom.is_cube() ? cube_kernel_hessian(xi, geom.cube_m()) : ball_kernel_hessian(xi, geom.m);
}

/// Ψ = −∇²K(0).
inline Eigen::MatrixXd hessian_at_zero(const KernelGeometry &geom) {
  const double c = geom.is_cube() ? (4.0 * pi * pi / 3.0) * geom.m * (geom.m + 1.0)
                                  : (4.0 * pi * pi / (geom.d + 2.0)) * geom.m * geom.m;
  return c * Eigen::MatrixXd::Identity(geom.d, geom.d);
}

/// Δ²K(0) = (2π)^4 · mean of |x|^4 over X.
inline double bilaplacian_at_zero(const KernelGeometry &geom) {
  const double d = geom.d, m = geom.m;
  const double c = std::pow(2.0 * pi, 4);
  if (!geom.is_cube())
    return c * std::pow(m, 4) * d / (d + 4.0);
  const double e2 = m * (m + 1.0) / 3.0;
  const double e4 = m * (m + 1.0) * (3.0 * m * m + 3.0 * m - 1.0) / 15.0;
  return c * (d * e4 + d * (d - 1.0) * e2 * e2);
}

/// Scale τ: 1/(4πmd) for the cube, 1/(4πm√d) for the ball.
inline double default_tau(const KernelGeometry &geom) {
  return geom.is_cube() ? 1.0 / (4.0 * pi * geom.m * geom.d) : 1.0 / (4.0 * pi * geom.m * std::sqrt(double(geom.d)));
}

struct KernelQuantities {
  Eigen::MatrixXd Psi;
  double trace = 0.0;
  double lambda_d = 0.0; // smallest eigenvalue of Ψ
  double lambda_1 = 0.0; // largest eigenvalue of Ψ
  double bilaplacian = 0.0;
  double tau = 0.0;
  double tail_sup = 0.0;
  double grad_sup = 0.0; // sup of |∇K| on B_τ
};

struct ConfigQuantities {
  Eigen::MatrixXd K;
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  double E0 = 0.0;
  double E1 = 0.0;
  double separation = std::numeric_limits<double>::infinity();
  double probe_mesh = 0.0;
};

/// K_ϑ = [K(θ_j − θ_k)] with its extreme eigenvalues.
inline ConfigQuantities kernel_matrix(const PointSet &theta, const KernelGeometry &geom) {
  require(!theta.empty(), "kernel_matrix: empty configuration");
  const auto s = static_cast<Eigen::Index>(theta.size());
  ConfigQuantities q;
  q.K.resize(s, s);
  for (Eigen::Index j = 0; j < s; ++j) {
    q.K(j, j) = 1.0;
    for (Eigen::Index k = j + 1; k < s; ++k)
      q.K(j, k) = q.K(k, j) = kernel_value(geom, kernel_argument(geom, theta[j], theta[k]));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.K, Eigen::EigenvaluesOnly);
  q.lambda_min = es.eigenvalues()(0);
  q.lambda_max = es.eigenvalues()(s - 1);
  q.separation = min_separation(theta, geom.omega);
  return q;
}

/// Empirical suprema over a probe grid of Σ|K(ω−θ_ℓ)|² and Σ|∇K(ω−θ_ℓ)|²,
/// the sums running over ℓ with |ω−θ_ℓ| ≥ Δ/2.
inline void energy_terms(const PointSet &theta, const KernelGeometry &geom, const Grid &probe,
                         ConfigQuantities &out) {
  const double half = 0.5 * min_separation(theta, geom.omega);
  out.E0 = out.E1 = 0.0;
  out.probe_mesh = probe.mesh();
  if (!std::isfinite(half))
    return;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const Point w = probe.point(i);
    double e0 = 0.0, e1 = 0.0;
    for (const auto &th : theta) {
      Point xi = kernel_argument(geom, w, th);
      if (xi.norm() < half)
        continue;
      const double k = kernel_value(geom, xi);
      e0 += k * k;
      e1 += kernel_gradient(geom, xi).squaredNorm();
    }
    out.E0 = std::max(out.E0, e0);
    out.E1 = std::max(out.E1, e1);
  }
}

// ---------------------------------------------------------------------------
// Tail supremum and gradient sup on B_τ

namespace detail {

// Unit directions: normalized nodes on the surface of [-1,1]^d.
inline std::vector<Point> sphere_directions(int d, int per_axis) {
  std::vector<Point> dirs;
  if (d == 1) {
    dirs.push_back(Point::Constant(1, 1.0));
    dirs.push_back(Point::Constant(1, -1.0));
    return dirs;
  }
  Grid g = Grid::lattice(Domain::centered_box(d, 1.0), std::vector<long>(static_cast<std::size_t>(d), per_axis));
  const double edge = 1.0 - 0.5 * g.spacing()[0];
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    if (p.cwiseAbs().maxCoeff() >= edge - 1e-12) {
      p.normalize();
      dirs.push_back(p);
    }
  }
  return dirs;
}

// Maximize |K| over {|ξ| ≥ τ} near a start by pattern search with
// projection onto the complement of the open ball.
inline double tail_local_ascent(const KernelGeometry &geom, Point x, double tau, double step) {
  auto project = [&](Point p) {
    double r = p.norm();
    if (r < tau)
      p = r > 0.0 ? Point(p * (tau / r)) : Point(Point::Unit(p.size(), 0) * tau);
    return p;
  };
  x = project(x);
  double best = std::abs(kernel_value(geom, x));
  while (step > 1e-14 * std::max(1.0, tau)) {
    bool moved = false;
    for (int j = 0; j < geom.d; ++j)
      for (double sgn : {1.0, -1.0}) {
        Point y = x;
        y[j] += sgn * step;
        y = project(y);
        double v = std::abs(kernel_value(geom, y));
        if (v > best) {
          best = v;
          x = y;
          moved = true;
        }
      }
    if (!moved)
      step *= 0.5;
  }
  return best;
}

} // namespace detail

struct TailEstimate {
  double value = 0.0;
  long samples = 0;
  double resolution = 0.0; // sampling spacing of the dense stage
};

/// sup of |K| outside B_τ by dense sampling plus local ascent. Cube samples the
/// torus period cell; the ball kernel is radial so a 1-d radius scan suffices.
inline TailEstimate tail_sup(const KernelGeometry &geom, double tau, int refine = 16) {
  require(tau > 0.0, "tail_sup: tau must be positive");
  TailEstimate est;
  if (!geom.is_cube()) {
    // local maxima of |W| decrease in radius; scanning a few lobes is enough
    const double r_max = tau + 40.0 / geom.m;
    const double dr = 1.0 / (refine * 8.0 * geom.m);
    double best = 0.0, best_r = tau;
    Point e = Point::Zero(geom.d);
    for (double r = tau; r <= r_max; r += dr) {
      e[0] = r;
      double v = std::abs(kernel_value(geom, e));
      ++est.samples;
      if (v > best) {
        best = v;
        best_r = r;
      }
    }
    e.setZero();
    e[0] = best_r;
    est.value = detail::tail_local_ascent(geom, e, tau, dr);
    est.resolution = dr;
    return est;
  }
  const int m = geom.cube_m(), d = geom.d;
  // per-axis resolution, capped so the dense stage stays below ~2^24 samples
  long R = static_cast<long>(refine) * (2 * m + 1);
  const long cap = static_cast<long>(std::pow(2.0, 24.0 / d));
  R = std::max<long>(8, std::min(R, cap));
  std::vector<double> vals(static_cast<std::size_t>(R));
  for (long i = 0; i < R; ++i)
    vals[static_cast<std::size_t>(i)] = dirichlet_1d(-0.5 + (i + 0.5) / static_cast<double>(R), m, 0);
  Grid g = Grid::lattice(Domain::centered_box(d, 0.5), std::vector<long>(static_cast<std::size_t>(d), R));
  std::vector<std::pair<double, std::size_t>> top;
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.multi_index(i);
    double r2 = 0.0, v = 1.0;
    for (int k = 0; k < d; ++k) {
      double c = -0.5 + (idx[static_cast<std::size_t>(k)] + 0.5) / static_cast<double>(R);
      r2 += c * c;
      v *= vals[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
    }
    ++est.samples;
    if (r2 < tau * tau)
      continue;
    top.emplace_back(std::abs(v), i);
  }
  std::vector<Point> starts;
  const std::size_t keep = std::min<std::size_t>(top.size(), 8);
  std::partial_sort(top.begin(), top.begin() + static_cast<long>(keep), top.end(),
                    [](auto &a, auto &b) { return a.first > b.first; });
  for (std::size_t i = 0; i < keep; ++i)
    starts.push_back(g.point(top[i].second));
  // the sphere |ξ| = τ is where |D_m| peaks just outside the origin
  for (const auto &u : detail::sphere_directions(d, d == 1 ? 2 : 64))
    starts.push_back(u * tau);
  std::vector<std::pair<double, Point>> ranked;
  for (const auto &s : starts)
    ranked.emplace_back(std::abs(kernel_value(geom, s)), s);
  std::sort(ranked.begin(), ranked.end(), [](auto &a, auto &b) { return a.first > b.first; });
  double best = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(ranked.size(), 16); ++i)
    best = std::max(best, detail::tail_local_ascent(geom, ranked[i].second, tau, 1.0 / static_cast<double>(R)));
  est.value = best;
  est.resolution = 1.0 / static_cast<double>(R);
  return est;
}

struct GradSupEstimate {
  double value = 0.0;
  Point witness;
};

/// sup of |∇K| over the closed ball B_τ, sampled on a lattice inside the ball and
/// on its boundary sphere.
inline GradSupEstimate grad_sup_on_ball(const KernelGeometry &geom, double tau, int per_axis = 21) {
  GradSupEstimate est;
  est.witness = Point::Zero(geom.d);
  if (tau <= 0.0)
    return est;
  auto consider = [&](const Point &p) {
    double v = kernel_gradient(geom, p).norm();
    if (v > est.value) {
      est.value = v;
      est.witness = p;
    }
  };
  Grid g = Grid::lattice(Domain::centered_box(geom.d, tau), std::vector<long>(static_cast<std::size_t>(geom.d), per_axis));
  for (std::size_t i = 0; i < g.size(); ++i) {
    Point p = g.point(i);
    if (p.norm() <= tau)
      consider(p);
  }
  for (const auto &u : detail::sphere_directions(geom.d, per_axis))
    consider(u * tau);
  return est;
}

/// Collect the geometry-level quantities used by the landscape certificate.
inline KernelQuantities kernel_quantities(const KernelGeometry &geom, double tau = -1.0) {
  KernelQuantities q;
  q.tau = tau > 0.0 ? tau : default_tau(geom);
  q.Psi = hessian_at_zero(geom);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.Psi, Eigen::EigenvaluesOnly);
  q.lambda_d = es.eigenvalues()(0);
  q.lambda_1 = es.eigenvalues()(geom.d - 1);
  q.trace = q.Psi.trace();
  q.bilaplacian = bilaplacian_at_zero(geom);
  q.tail_sup = tail_sup(geom, q.tau).value;
  q.grad_sup = grad_sup_on_ball(geom, q.tau).value;
  return q;
}

// ---------------------------------------------------------------------------
// Bound audit

struct AuditEntry {
  std::string quantity;
  double bound = 0.0;
  double observed = 0.0;
  std::vector<double> witness;
  bool pass = true;
};

/// Δ²K(0) by central differences of the analytic Laplacian.
inline double bilaplacian_fd(const KernelGeometry &geom) {
  const double h = 1e-3 / geom.m;
  auto lap = [&](const Point &p) { return kernel_hessian(geom, p).trace(); };
  const Point z = Point::Zero(geom.d);
  const double l0 = lap(z);
  double acc = 0.0;
  for (int j = 0; j < geom.d; ++j) {
    Point e = Point::Unit(geom.d, j) * h;
    acc += (lap(e) - 2.0 * l0 + lap(Point(-e))) / (h * h);
  }
  return acc;
}

/// Check the gradient bound on B_τ and the Δ²K(0) upper bound from the
/// kernel constants.
inline std::vector<AuditEntry> kernel_bound_audit(const KernelGeometry &geom, double tau) {
  require(tau >= 0.0, "kernel_bound_audit: tau must be nonnegative");
  std::vector<AuditEntry> out;
  const double m = geom.m, d = geom.d;
  auto gs = grad_sup_on_ball(geom, tau);
  AuditEntry grad;
  grad.quantity = "grad_sup_on_ball";
  grad.bound = geom.is_cube() ? 4.0 * pi * pi * m * m * tau : 4.0 * pi * pi * m * m * tau / (d + 2.0);
  grad.observed = gs.value;
  grad.witness.assign(gs.witness.data(), gs.witness.data() + gs.witness.size());
  grad.pass = grad.observed <= grad.bound * (1.0 + 1e-12);
  out.push_back(grad);

  const double lap_bound = geom.is_cube() ? 16.0 * std::pow(pi, 4) * d * d * m * m * (m + 1) * (m + 1) / 5.0
                                          : 16.0 * std::pow(pi, 4) * std::pow(m, 4) * d / (d + 4.0);
  AuditEntry exact{"bilaplacian_at_zero", lap_bound, bilaplacian_at_zero(geom), {}, true};
  exact.pass = exact.observed <= lap_bound * (1.0 + 1e-12);
  out.push_back(exact);
  // finite differences carry O(h²) truncation error, hence the looser margin
  AuditEntry fd{"bilaplacian_fd", lap_bound, bilaplacian_fd(geom), {}, true};
  fd.pass = fd.observed <= lap_bound * (1.0 + 1e-5);
  out.push_back(fd);
  return out;
}

/// Separation-driven bounds for a configuration with mΔ = β: the eigenvalue
/// window of K_ϑ (cube, d >= 2, β >= πd^{3/2}/log 2) and the energy bounds
/// (cube: d >= 2, β >= 4π√d; ball: any β), checked against probe suprema.
/// Bounds whose hypotheses fail are omitted from the report.
inline std::vector<AuditEntry> config_bound_audit(const PointSet &theta, const KernelGeometry &geom,
                                                  const Grid &probe) {
  std::vector<AuditEntry> out;
  ConfigQuantities cq = kernel_matrix(theta, geom);
  if (!std::isfinite(cq.separation))
    return out;
  const double m = geom.m, d = geom.d;
  const double beta = m * cq.separation;
  auto entry = [](std::string name, double bound, double observed) {
    AuditEntry e{std::move(name), bound, observed, {}, true};
    e.pass = observed <= bound * (1.0 + 1e-12) + 1e-14;
    return e;
  };
  if (geom.is_cube() && geom.d >= 2 && beta >= pi * std::pow(d, 1.5) / std::log(2.0)) {
    const double w = std::pow(d, 1.5) / beta;
    out.push_back(entry("one_minus_lambda_min", w, 1.0 - cq.lambda_min));
    out.push_back(entry("lambda_max_minus_one", w, cq.lambda_max - 1.0));
  }
  energy_terms(theta, geom, probe, cq);
  if (geom.is_cube()) {
    if (geom.d >= 2 && beta >= 4.0 * pi * std::sqrt(d)) {
      out.push_back(entry("E0", 16.0 * pi * pi * d * d / (beta * beta), cq.E0));
      out.push_back(entry("E1", 64.0 * std::pow(pi, 4) * d * d * d * m * m / (beta * beta), cq.E1));
    }
  } else {
    const double vb = unit_ball_volume(geom.d);
    const double c = d * std::pow(4.0, d + 1.0) / (vb * vb * std::pow(beta, d + 1.0));
    out.push_back(entry("E0", c / (pi * pi), cq.E0));
    out.push_back(entry("E1", c * 4.0 * pi * pi * m * m, cq.E1));
  }
  return out;
}

} // namespace gmusic
