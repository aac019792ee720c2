#pragma once
// MUSIC function values and derivatives, FFT grid evaluation, and the
// numeric admissibility certificate.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gmusic/error.hpp"
#include "gmusic/fft.hpp"
#include "gmusic/geometry.hpp"
#include "gmusic/hankel.hpp"
#include "gmusic/kernel.hpp"
#include "gmusic/signal.hpp"

namespace gmusic {

/// q_W(ω) = 1 − ‖P_W φ_ω‖². Two evaluation paths:
///  - subspace: W spanned by an orthonormal basis of functions on X (cube);
///  - analytic: W = U for a known configuration, q = 1 − v(ω)ᵀ K_ϑ⁻¹ v(ω)
///    with v_ℓ = K(ω − θ_ℓ) (either geometry, noiseless).
class MusicEvaluator {
public:
  static MusicEvaluator from_basis(const SubspaceBasis &basis) {
    require(basis.geom.is_cube(), "MusicEvaluator: subspace path needs the cube geometry");
    const auto N = static_cast<Eigen::Index>(std::pow(static_cast<double>(basis.geom.side()), basis.geom.d));
    require(basis.ambient() == N, "MusicEvaluator: basis length does not match |X|");
    MusicEvaluator ev(basis.geom);
    ev.analytic_ = false;
    ev.basis_ = basis.columns;
    const PointSet X = lattice_sites(basis.geom.cube_m(), basis.geom.d);
    ev.X_.resize(N, basis.geom.d);
    for (Eigen::Index i = 0; i < N; ++i)
      ev.X_.row(i) = X[static_cast<std::size_t>(i)].transpose();
    return ev;
  }

  static MusicEvaluator analytic(const PointSet &theta, const KernelGeometry &geom) {
    MusicEvaluator ev(geom);
    ev.analytic_ = true;
    ev.theta_ = theta;
    auto cq = kernel_matrix(theta, geom);
    if (!(cq.lambda_min > 1e-10))
      throw IllConditioned("MusicEvaluator: kernel matrix not positive definite, lambda_min " +
                               std::to_string(cq.lambda_min),
                           cq.lambda_min);
    ev.chol_ = Eigen::LLT<Eigen::MatrixXd>(cq.K);
    return ev;
  }

  const KernelGeometry &geometry() const { return geom_; }
  bool is_analytic() const { return analytic_; }
  Eigen::Index dim() const { return analytic_ ? static_cast<Eigen::Index>(theta_.size()) : basis_.cols(); }
  const Eigen::MatrixXcd &basis() const { return basis_; }
  long clamp_count() const { return clamps_->load(); }

  double value(const Point &omega) const {
    require(omega.size() == geom_.d, "music_value: dimension mismatch");
    double q;
    if (analytic_) {
      Eigen::VectorXd v = kernel_vector(omega);
      q = 1.0 - v.dot(chol_.solve(v));
    } else {
      Eigen::VectorXcd c = coefficients(omega, 0);
      q = 1.0 - c.squaredNorm();
    }
    return clamp(q);
  }

  Eigen::VectorXd gradient(const Point &omega) const {
    require(omega.size() == geom_.d, "music_gradient: dimension mismatch");
    const int d = geom_.d;
    Eigen::VectorXd g(d);
    if (analytic_) {
      Eigen::VectorXd v = kernel_vector(omega);
      Eigen::MatrixXd J = kernel_jacobian(omega);
      g = -2.0 * J.transpose() * chol_.solve(v);
      return g;
    }
    Eigen::MatrixXcd C = coefficient_block(omega, 1);
    for (int k = 0; k < d; ++k)
      g[k] = -2.0 * C.col(0).dot(C.col(1 + k)).real();
    return g;
  }

  Eigen::MatrixXd hessian(const Point &omega) const {
    require(omega.size() == geom_.d, "music_hessian: dimension mismatch");
    const int d = geom_.d;
    Eigen::MatrixXd H(d, d);
    if (analytic_) {
      Eigen::VectorXd v = kernel_vector(omega);
      Eigen::MatrixXd J = kernel_jacobian(omega);
      Eigen::VectorXd w = chol_.solve(v);
      H = -2.0 * J.transpose() * chol_.solve(J);
      for (std::size_t l = 0; l < theta_.size(); ++l)
        H -= 2.0 * w[static_cast<Eigen::Index>(l)] * kernel_hessian(geom_, kernel_argument(geom_, omega, theta_[l]));
      return 0.5 * (H + H.transpose());
    }
    Eigen::MatrixXcd C = coefficient_block(omega, 2);
    int col = 1 + d;
    for (int k = 0; k < d; ++k)
      for (int l = k; l < d; ++l, ++col) {
        double h = C.col(1 + l).dot(C.col(1 + k)).real() + C.col(0).dot(C.col(col)).real();
        H(k, l) = H(l, k) = -2.0 * h;
      }
    return H;
  }

private:
  explicit MusicEvaluator(const KernelGeometry &geom) : geom_(geom), clamps_(std::make_shared<std::atomic<long>>(0)) {}

  double clamp(double q) const {
    if (q < 0.0) {
      if (q < -1e-10)
        throw InternalError("music_value: q = " + std::to_string(q) + " far below zero");
      clamps_->fetch_add(1);
      return 0.0;
    }
    return std::min(q, 1.0);
  }

  Eigen::VectorXd kernel_vector(const Point &omega) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(theta_.size()));
    for (std::size_t l = 0; l < theta_.size(); ++l)
      v[static_cast<Eigen::Index>(l)] = kernel_value(geom_, kernel_argument(geom_, omega, theta_[l]));
    return v;
  }

  Eigen::MatrixXd kernel_jacobian(const Point &omega) const {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(theta_.size()), geom_.d);
    for (std::size_t l = 0; l < theta_.size(); ++l)
      J.row(static_cast<Eigen::Index>(l)) = kernel_gradient(geom_, kernel_argument(geom_, omega, theta_[l])).transpose();
    return J;
  }

  Eigen::VectorXcd steering(const Point &omega) const {
    const double scale = 1.0 / std::sqrt(static_cast<double>(X_.rows()));
    Eigen::VectorXd phase = (2.0 * pi) * (X_ * omega);
    Eigen::VectorXcd phi(X_.rows());
    for (Eigen::Index i = 0; i < X_.rows(); ++i)
      phi[i] = std::polar(scale, phase[i]);
    return phi;
  }

  Eigen::VectorXcd coefficients(const Point &omega, int) const { return basis_.adjoint() * steering(omega); }

  // Columns: c = U*φ, then U*(2πi x_k φ) for each k, then U*((2πi)² x_k x_l φ) for k <= l.
  Eigen::MatrixXcd coefficient_block(const Point &omega, int order) const {
    const int d = geom_.d;
    const Eigen::Index N = X_.rows();
    const int cols = 1 + d + (order >= 2 ? d * (d + 1) / 2 : 0);
    Eigen::VectorXcd phi = steering(omega);
    Eigen::MatrixXcd M(N, cols);
    M.col(0) = phi;
    const cplx ti(0.0, 2.0 * pi);
    for (int k = 0; k < d; ++k)
      M.col(1 + k) = (ti * X_.col(k).cast<cplx>()).cwiseProduct(phi);
    if (order >= 2) {
      int col = 1 + d;
      for (int k = 0; k < d; ++k)
        for (int l = k; l < d; ++l, ++col)
          M.col(col) = (ti * ti * X_.col(k).cwiseProduct(X_.col(l)).cast<cplx>()).cwiseProduct(phi);
    }
    return basis_.adjoint() * M;
  }

  KernelGeometry geom_;
  bool analytic_ = false;
  Eigen::MatrixXcd basis_;
  Eigen::MatrixXd X_;
  PointSet theta_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  std::shared_ptr<std::atomic<long>> clamps_;
};

inline double music_value(const MusicEvaluator &ev, const Point &omega) { return ev.value(omega); }
inline Eigen::VectorXd music_gradient(const MusicEvaluator &ev, const Point &omega) { return ev.gradient(omega); }
inline Eigen::MatrixXd music_hessian(const MusicEvaluator &ev, const Point &omega) { return ev.hessian(omega); }

struct GridValues {
  Eigen::VectorXd values; // in grid enumeration order
  bool direct_fallback = false;
  std::string note;
};

/// q on every grid node. Uniform torus lattices with a subspace evaluator use one
/// d-dimensional FFT per basis column; anything else is evaluated point by point.
inline GridValues grid_evaluate(const MusicEvaluator &ev, const Grid &grid) {
  GridValues out;
  const auto total = static_cast<Eigen::Index>(grid.size());
  const bool fft_ok = !ev.is_analytic() && grid.uniform() && grid.domain().is_torus();
  if (!fft_ok) {
    out.direct_fallback = true;
    out.note = "direct evaluation at " + std::to_string(total) + " points";
    out.values.resize(total);
    for (Eigen::Index i = 0; i < total; ++i)
      out.values[i] = ev.value(grid.point(static_cast<std::size_t>(i)));
    return out;
  }
  out.values = Eigen::VectorXd::Ones(total);
  if (ev.dim() == 0)
    return out;
  const KernelGeometry &geom = ev.geometry();
  const int m = geom.cube_m(), d = geom.d;
  std::vector<int> dims(grid.counts().begin(), grid.counts().end());
  FFTPlan plan(dims, FFTPlan::Direction::Backward);
  // flat FFT index of x mod n for each x in X
  const PointSet X = lattice_sites(m, d);
  std::vector<std::size_t> fold(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    std::size_t idx = 0;
    for (int k = 0; k < d; ++k) {
      const long n = grid.counts()[static_cast<std::size_t>(k)];
      const long c = static_cast<long>(X[i][k]);
      idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(((c % n) + n) % n);
    }
    fold[i] = idx;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(X.size()));
  std::vector<cplx> buf(static_cast<std::size_t>(total));
  for (Eigen::Index j = 0; j < ev.dim(); ++j) {
    std::fill(buf.begin(), buf.end(), cplx(0.0));
    for (std::size_t i = 0; i < X.size(); ++i)
      buf[fold[i]] += std::conj(ev.basis()(static_cast<Eigen::Index>(i), j));
    plan.execute(buf);
    for (Eigen::Index g = 0; g < total; ++g)
      out.values[g] -= std::norm(buf[static_cast<std::size_t>(g)] * scale);
  }
  long clamped = 0;
  for (Eigen::Index g = 0; g < total; ++g) {
    double &q = out.values[g];
    if (q < 0.0) {
      if (q < -1e-10)
        throw InternalError("grid_evaluate: q = " + std::to_string(q) + " far below zero");
      q = 0.0;
      ++clamped;
    }
  }
  if (clamped > 0)
    out.note = "clamped " + std::to_string(clamped) + " tiny negative values";
  return out;
}

struct LandscapeDiagnostics {
  double epsilon = 0.0;
  double rho = 0.0;
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double cond1_lhs = 0.0, cond1_rhs = 0.0;
  double cond2_lhs = 0.0, cond2_rhs = 0.0;
  double cond3_lhs = 0.0, cond3_rhs = 0.0;
  double grad_sup_bound = 0.0;
  double hessian_lo = 0.0, hessian_hi = 0.0;
  bool tau_ok = false; // τ <= Δ/2
  bool admissible = false;
};

/// Evaluate the three sufficient conditions for an admissible landscape
/// and the resulting parameter tuple (ε, ρ, α0, α1).
inline LandscapeDiagnostics check_admissibility(const KernelQuantities &kq, const ConfigQuantities &cq,
                                                double proj_dist, double delta1, double delta2) {
  require(delta1 > 0.0 && delta2 > 0.0, "check_admissibility: delta1, delta2 must be positive");
  require(delta1 + delta2 < 2.0, "check_admissibility: need delta1 + delta2 < 2");
  require(proj_dist >= 0.0, "check_admissibility: negative projector distance");
  LandscapeDiagnostics out;
  const double tau = kq.tau, G = kq.grad_sup, lap = kq.bilaplacian, tr = kq.trace, ld = kq.lambda_d;
  const double root_lap = std::sqrt(lap);
  const double gap = 1.0 - kq.tail_sup * kq.tail_sup;

  out.cond1_lhs = std::sqrt(2.0 * tau * G) + G * G / (cq.lambda_min * root_lap) + cq.E1 / (cq.lambda_min * root_lap);
  out.cond1_rhs = delta1 * ld / root_lap;
  out.cond2_lhs = cq.E0 + cq.lambda_max * std::max(std::abs(1.0 / cq.lambda_max - 1.0), std::abs(1.0 / cq.lambda_min - 1.0));
  out.cond2_rhs = 0.375 * gap;
  out.cond3_lhs = proj_dist;
  out.cond3_rhs = delta2 * std::min({0.25 * gap, ld / (2.0 * std::sqrt(lap + tr * tr)), 0.5 * tau * ld / std::sqrt(tr)});

  out.epsilon = 2.0 * std::sqrt(tr) / (delta2 * ld) * proj_dist;
  out.rho = tau;
  out.alpha0 = proj_dist * proj_dist;
  out.alpha1 = (0.625 - 0.25 * delta2) * gap;
  out.grad_sup_bound = 2.0 * std::sqrt(tr);
  out.hessian_lo = (2.0 - delta1 - delta2) * ld;
  out.hessian_hi = (2.0 + delta1 + delta2) * kq.lambda_1;
  out.tau_ok = tau <= 0.5 * cq.separation;
  out.admissible = out.tau_ok && cq.lambda_min > 0.0 && out.cond1_lhs <= out.cond1_rhs &&
                   out.cond2_lhs <= out.cond2_rhs && out.cond3_lhs <= out.cond3_rhs;
  return out;
}

/// Default (δ1, δ2): (3/2, 1/4) for the cube, (1, 1/2) for the ball.
inline std::pair<double, double> default_deltas(const KernelGeometry &geom) {
  return geom.is_cube() ? std::pair{1.5, 0.25} : std::pair{1.0, 0.5};
}

} // namespace gmusic
