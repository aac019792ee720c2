#pragma once
// Implicit multilevel Hankel operator over the cube lattice, FFT matvecs,
// matvec-only truncated SVD, subspace bases and perturbation audits.

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gmusic/error.hpp"
#include "gmusic/fft.hpp"
#include "gmusic/kernel.hpp"
#include "gmusic/signal.hpp"

namespace gmusic {

/// Operators larger than this are never materialized.
inline constexpr Eigen::Index dense_cutoff = 4096;

/// H(ỹ)_{j,k} = ỹ(x_j + x_k) over the canonical enumeration of X = Q_m ∩ Z^d.
/// Matvecs are circular convolutions on an L^d torus with L >= 4m+1.
class HankelOperator {
public:
  explicit HankelOperator(const SampleSet &samples)
      : geom_(samples.geom), samples_(samples.values), matvecs_(std::make_shared<std::atomic<long>>(0)) {
    samples.validate();
    const int m = geom_.cube_m(), d = geom_.d;
    L_ = next_smooth(4 * m + 1);
    std::size_t total = 1;
    for (int k = 0; k < d; ++k)
      total *= static_cast<std::size_t>(L_);
    fwd_ = std::make_shared<FFTPlan>(std::vector<int>(static_cast<std::size_t>(d), L_), FFTPlan::Direction::Forward);
    bwd_ = std::make_shared<FFTPlan>(std::vector<int>(static_cast<std::size_t>(d), L_), FFTPlan::Direction::Backward);

    // sample array indexed by z mod L
    std::vector<cplx> a(total, cplx(0.0));
    const long star = geom_.star_side();
    for (Eigen::Index i = 0; i < samples_.size(); ++i)
      a[torus_index(unflatten(i, star, 2 * m))] = samples_[i];
    fwd_->execute(a);
    yhat_ = std::move(a);

    const long side = geom_.side();
    const auto N = static_cast<Eigen::Index>(std::pow(static_cast<double>(side), d));
    in_index_.resize(static_cast<std::size_t>(N));
    out_index_.resize(static_cast<std::size_t>(N));
    for (Eigen::Index j = 0; j < N; ++j) {
      auto x = unflatten(j, side, m);
      out_index_[static_cast<std::size_t>(j)] = torus_index(x);
      for (auto &c : x)
        c = -c;
      in_index_[static_cast<std::size_t>(j)] = torus_index(x);
    }
    N_ = N;
    total_ = total;
  }

  const KernelGeometry &geometry() const { return geom_; }
  const Eigen::VectorXcd &samples() const { return samples_; }
  Eigen::Index size() const { return N_; }
  int fft_side() const { return L_; }
  long matvec_count() const { return matvecs_->load(); }

  /// Entry (j,k) = ỹ(x_j + x_k).
  cplx entry(Eigen::Index j, Eigen::Index k) const {
    const int m = geom_.cube_m();
    auto xj = unflatten(j, geom_.side(), m), xk = unflatten(k, geom_.side(), m);
    Eigen::Index idx = 0;
    for (std::size_t c = 0; c < xj.size(); ++c)
      idx = idx * geom_.star_side() + (xj[c] + xk[c] + 2 * m);
    return samples_[idx];
  }

  Eigen::MatrixXcd dense() const {
    require(N_ <= dense_cutoff, "HankelOperator::dense: N exceeds the dense cutoff");
    Eigen::MatrixXcd H(N_, N_);
    for (Eigen::Index j = 0; j < N_; ++j)
      for (Eigen::Index k = 0; k < N_; ++k)
        H(j, k) = entry(j, k);
    return H;
  }

  Eigen::VectorXcd apply(const Eigen::VectorXcd &v) const {
    require(v.size() == N_, "HankelOperator::apply: length mismatch");
    std::vector<cplx> buf(total_, cplx(0.0));
    for (Eigen::Index j = 0; j < N_; ++j)
      buf[in_index_[static_cast<std::size_t>(j)]] = v[j];
    fwd_->execute(buf);
    for (std::size_t i = 0; i < total_; ++i)
      buf[i] *= yhat_[i];
    bwd_->execute(buf);
    const double scale = 1.0 / static_cast<double>(total_);
    Eigen::VectorXcd out(N_);
    for (Eigen::Index j = 0; j < N_; ++j)
      out[j] = buf[out_index_[static_cast<std::size_t>(j)]] * scale;
    matvecs_->fetch_add(1);
    return out;
  }

  /// H is complex symmetric, so H* w = conj(H conj(w)).
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd &w) const {
    return apply(Eigen::VectorXcd(w.conjugate())).conjugate();
  }

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd &V) const {
    Eigen::MatrixXcd out(N_, V.cols());
    for (Eigen::Index c = 0; c < V.cols(); ++c)
      out.col(c) = apply(Eigen::VectorXcd(V.col(c)));
    return out;
  }

  Eigen::MatrixXcd apply_adjoint(const Eigen::MatrixXcd &W) const {
    Eigen::MatrixXcd out(N_, W.cols());
    for (Eigen::Index c = 0; c < W.cols(); ++c)
      out.col(c) = apply_adjoint(Eigen::VectorXcd(W.col(c)));
    return out;
  }

private:
  // canonical index -> lattice coordinates in [-half, half]^d, first axis slowest
  std::vector<long> unflatten(Eigen::Index i, long side, long half) const {
    std::vector<long> x(static_cast<std::size_t>(geom_.d));
    long r = static_cast<long>(i);
    for (std::size_t k = x.size(); k-- > 0;) {
      x[k] = r % side - half;
      r /= side;
    }
    return x;
  }

  std::size_t torus_index(const std::vector<long> &x) const {
    std::size_t idx = 0;
    for (long c : x)
      idx = idx * static_cast<std::size_t>(L_) + static_cast<std::size_t>(((c % L_) + L_) % L_);
    return idx;
  }

  KernelGeometry geom_;
  Eigen::VectorXcd samples_;
  int L_ = 0;
  Eigen::Index N_ = 0;
  std::size_t total_ = 0;
  std::shared_ptr<FFTPlan> fwd_, bwd_;
  std::vector<cplx> yhat_;
  std::vector<std::size_t> in_index_, out_index_;
  std::shared_ptr<std::atomic<long>> matvecs_;
};

inline HankelOperator build_hankel(const SampleSet &samples) { return HankelOperator(samples); }

/// Explicit matrix with the operator interface used by truncated_svd.
class DenseOperator {
public:
  explicit DenseOperator(Eigen::MatrixXcd A) : A_(std::move(A)) {
    require(A_.rows() == A_.cols(), "DenseOperator: square matrix required");
  }
  Eigen::Index size() const { return A_.rows(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd &v) const { return A_ * v; }
  Eigen::VectorXcd apply_adjoint(const Eigen::VectorXcd &w) const { return A_.adjoint() * w; }
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd &V) const { return A_ * V; }
  Eigen::MatrixXcd apply_adjoint(const Eigen::MatrixXcd &W) const { return A_.adjoint() * W; }

private:
  Eigen::MatrixXcd A_;
};

/// Orthonormal columns representing functions on X in canonical order.
struct SubspaceBasis {
  enum class Origin { Exact, Estimated };

  KernelGeometry geom;
  Eigen::MatrixXcd columns;
  Origin origin = Origin::Exact;

  Eigen::Index dim() const { return columns.cols(); }
  Eigen::Index ambient() const { return columns.rows(); }

  double orthonormality_error() const {
    if (dim() == 0)
      return 0.0;
    return (columns.adjoint() * columns - Eigen::MatrixXcd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }
};

struct SingularSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXcd left;
  Eigen::MatrixXcd right;
  std::vector<double> residuals;
  std::vector<bool> converged;
  std::string method;
  long operator_applications = 0;

  SubspaceBasis left_basis(const KernelGeometry &geom, Eigen::Index k) const {
    require(k >= 0 && k <= left.cols(), "SingularSpectrum::left_basis: k out of range");
    return {geom, left.leftCols(k), SubspaceBasis::Origin::Estimated};
  }
};

namespace detail {

inline Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd M(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      double re = g(rng), im = g(rng);
      M(r, c) = cplx(re, im);
    }
  return M;
}

// Orthogonalize p against basis columns [0, n) twice (classical Gram-Schmidt
// with reorthogonalization); returns the accumulated coefficients.
inline Eigen::VectorXcd project_out(const Eigen::MatrixXcd &basis, Eigen::Index n, Eigen::VectorXcd &p) {
  Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(n);
  if (n == 0)
    return coef;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXcd c = basis.leftCols(n).adjoint() * p;
    p.noalias() -= basis.leftCols(n) * c;
    coef += c;
  }
  return coef;
}

// Append the columns of P to basis (currently n columns), replacing numerically
// dependent columns by random directions. Returns the coefficient matrix C with
// P = basis[:, 0:n+accepted] * C (up to the deflation tolerance).
inline Eigen::MatrixXcd extend_basis(Eigen::MatrixXcd &basis, Eigen::Index &n, const Eigen::MatrixXcd &P,
                                     Eigen::Index max_new, std::mt19937_64 &rng, double scale) {
  const Eigen::Index n0 = n;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n0 + max_new, P.cols());
  Eigen::Index added = 0;
  for (Eigen::Index c = 0; c < P.cols(); ++c) {
    Eigen::VectorXcd p = P.col(c);
    const double orig = p.norm();
    C.col(c).head(n) = project_out(basis, n, p);
    const double nrm = p.norm();
    if (added < max_new) {
      Eigen::VectorXcd u;
      if (nrm > 1e-13 * std::max(orig, scale) && nrm > 0.0) {
        u = p / nrm;
      } else {
        u = random_complex(basis.rows(), 1, rng).col(0);
        project_out(basis, n, u);
        u.normalize();
      }
      C(n, c) = u.dot(p);
      basis.col(n) = u;
      ++n;
      ++added;
    }
  }
  C.conservativeResize(n, Eigen::NoChange);
  return C;
}

template <class Op>
SingularSpectrum block_lanczos(const Op &H, Eigen::Index k, double tol, std::uint64_t seed, double significance,
                               Eigen::Index max_columns, int max_blocks, bool &ok) {
  const Eigen::Index N = H.size();
  const Eigen::Index b = std::min<Eigen::Index>(k + 4, N);
  const Eigen::Index cap = std::min<Eigen::Index>(N, std::max<Eigen::Index>(max_columns, b));
  std::mt19937_64 rng(seed);
  Eigen::MatrixXcd U(N, cap), V(N, cap);
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(cap, cap);
  Eigen::Index nu = 0, nv = 0;
  double scale = 0.0;
  SingularSpectrum out;
  out.method = "block_lanczos";
  extend_basis(V, nv, random_complex(N, b, rng), b, rng, 1.0);

  for (int block = 0; block < max_blocks; ++block) {
    const Eigen::Index v0 = nu; // the newest V block occupies [nu, nv)
    const Eigen::Index bv = nv - v0;
    Eigen::MatrixXcd P = H.apply(Eigen::MatrixXcd(V.middleCols(v0, bv)));
    out.operator_applications += bv;
    scale = std::max(scale, P.colwise().norm().maxCoeff());
    Eigen::MatrixXcd C = extend_basis(U, nu, P, bv, rng, scale);
    T.block(0, v0, nu, bv) = C;

    Eigen::MatrixXcd S; // next-block coupling, H* U_last = ... + V_next S
    Eigen::Index bnext = std::min<Eigen::Index>(b, cap - nv);
    if (bnext > 0) {
      Eigen::MatrixXcd Q = H.apply_adjoint(Eigen::MatrixXcd(U.middleCols(v0, bv)));
      out.operator_applications += bv;
      const Eigen::Index before = nv;
      Eigen::MatrixXcd D = extend_basis(V, nv, Q, bnext, rng, scale);
      S = D.bottomRows(nv - before);
    }

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(T.topLeftCorner(nu, nu), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd &sig = svd.singularValues();
    const Eigen::Index kk = std::min(k, nu);
    const double s1 = sig.size() > 0 ? sig(0) : 0.0;
    out.residuals.assign(static_cast<std::size_t>(kk), 0.0);
    out.converged.assign(static_cast<std::size_t>(kk), true);
    bool all = kk == k;
    for (Eigen::Index i = 0; i < kk; ++i) {
      double r = 0.0;
      if (S.size() > 0)
        r = (S * svd.matrixU().col(i).tail(bv)).norm();
      out.residuals[static_cast<std::size_t>(i)] = r;
      bool conv = r <= tol * s1 || s1 == 0.0 || sig(i) < significance * s1;
      out.converged[static_cast<std::size_t>(i)] = conv;
      all = all && conv;
    }
    const bool exhausted = bnext == 0;
    if (all || exhausted) {
      out.values = sig.head(kk);
      out.left = U.leftCols(nu) * svd.matrixU().leftCols(kk);
      out.right = V.leftCols(nu) * svd.matrixV().leftCols(kk);
      ok = all || nu == N;
      if (nu == N)
        std::fill(out.converged.begin(), out.converged.end(), true);
      return out;
    }
  }
  ok = false;
  return out;
}

template <class Op>
SingularSpectrum subspace_iteration(const Op &H, Eigen::Index k, double tol, std::uint64_t seed, double significance,
                                    int max_iter, bool &ok) {
  const Eigen::Index N = H.size();
  const Eigen::Index p = std::min<Eigen::Index>(k + 10, N);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  SingularSpectrum out;
  out.method = "subspace_iteration";
  Eigen::MatrixXcd Qm = random_complex(N, p, rng);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::MatrixXcd Y = H.apply(Qm);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
    Eigen::MatrixXcd Qy = qr.householderQ() * Eigen::MatrixXcd::Identity(N, p);
    Eigen::MatrixXcd Z = H.apply_adjoint(Qy); // Z = H* Qy, so Qy* H = Z*
    out.operator_applications += 2 * p;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd &sig = svd.singularValues();
    // Z = W Σ X*  =>  Qy* H = X Σ W*, left vectors Qy X, right W
    Eigen::MatrixXcd left = Qy * svd.matrixV();
    Eigen::MatrixXcd right = svd.matrixU();
    const Eigen::Index kk = std::min(k, p);
    const double s1 = sig(0);
    out.values = sig.head(kk);
    out.left = left.leftCols(kk);
    out.right = right.leftCols(kk);
    Eigen::MatrixXcd HR = H.apply(Eigen::MatrixXcd(out.right));
    out.operator_applications += kk;
    out.residuals.assign(static_cast<std::size_t>(kk), 0.0);
    out.converged.assign(static_cast<std::size_t>(kk), true);
    bool all = true;
    for (Eigen::Index i = 0; i < kk; ++i) {
      double r = (HR.col(i) - sig(i) * out.left.col(i)).norm();
      out.residuals[static_cast<std::size_t>(i)] = r;
      bool conv = r <= tol * s1 || s1 == 0.0 || sig(i) < significance * s1;
      out.converged[static_cast<std::size_t>(i)] = conv;
      all = all && conv;
    }
    if (all) {
      ok = true;
      return out;
    }
    Qm = right;
  }
  ok = false;
  return out;
}

} // namespace detail

struct SvdOptions {
  double tol = 1e-9;
  std::uint64_t seed = 0;
  /// Triplets with σ_i/σ_1 below this need not meet the residual tolerance.
  double significance = 0.0;
  Eigen::Index max_columns = 1200;
  int max_blocks = 300;
  int fallback_iterations = 300;
};

/// Leading k singular triplets from matvecs only: block Golub-Kahan-Lanczos
/// with full reorthogonalization, falling back to subspace iteration.
template <class Op> SingularSpectrum truncated_svd(const Op &H, Eigen::Index k, const SvdOptions &opt = {}) {
  require(k >= 0 && k <= H.size(), "truncated_svd: need 0 <= k <= N");
  if (k == 0)
    return {Eigen::VectorXd(0), Eigen::MatrixXcd(H.size(), 0), Eigen::MatrixXcd(H.size(), 0), {}, {}, "none", 0};
  bool ok = false;
  auto spec = detail::block_lanczos(H, k, opt.tol, opt.seed, opt.significance, opt.max_columns, opt.max_blocks, ok);
  if (ok)
    return spec;
  long used = spec.operator_applications;
  spec = detail::subspace_iteration(H, k, opt.tol, opt.seed, opt.significance, opt.fallback_iterations, ok);
  spec.operator_applications += used;
  if (!ok)
    throw ConvergenceError("truncated_svd: " + std::to_string(k) + " triplets did not reach tolerance " +
                           std::to_string(opt.tol));
  return spec;
}

template <class Op> SingularSpectrum truncated_svd(const Op &H, Eigen::Index k, double tol, std::uint64_t seed) {
  SvdOptions opt;
  opt.tol = tol;
  opt.seed = seed;
  return truncated_svd(H, k, opt);
}

/// Largest k with σ_k/σ_1 >= ratio_threshold; 0 for a zero spectrum.
inline Eigen::Index detect_model_order(const SingularSpectrum &spectrum, double ratio_threshold) {
  if (spectrum.values.size() == 0 || !(spectrum.values(0) > 0.0))
    return 0;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < spectrum.values.size(); ++i)
    if (spectrum.values(i) >= ratio_threshold * spectrum.values(0))
      k = i + 1;
  return k;
}

/// Columns e^{2πiθ_ℓ·x} over X, unnormalized (the synthesis operator T_ϑ).
inline Eigen::MatrixXcd synthesis_matrix(const PointSet &theta, const KernelGeometry &geom) {
  require(geom.is_cube(), "synthesis_matrix: cube geometry required");
  const PointSet X = lattice_sites(geom.cube_m(), geom.d);
  Eigen::MatrixXcd T(static_cast<Eigen::Index>(X.size()), static_cast<Eigen::Index>(theta.size()));
  for (std::size_t l = 0; l < theta.size(); ++l)
    for (std::size_t i = 0; i < X.size(); ++i)
      T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = std::polar(1.0, 2.0 * pi * theta[l].dot(X[i]));
  return T;
}

/// Orthonormal basis of U = span{φ_θ : θ ∈ ϑ}.
inline SubspaceBasis exact_basis(const PointSet &theta, const KernelGeometry &geom, double cond_tol = 1e-10) {
  require(!theta.empty(), "exact_basis: empty configuration");
  Eigen::MatrixXcd T = synthesis_matrix(theta, geom);
  const Eigen::Index N = T.rows(), s = T.cols();
  require(s <= N, "exact_basis: more frequencies than lattice points");
  T /= std::sqrt(static_cast<double>(N));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(T);
  Eigen::MatrixXcd R = qr.matrixQR().topRows(s).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
  const double smin = svd.singularValues()(s - 1);
  if (!(smin >= cond_tol))
    throw IllConditioned("exact_basis: steering vectors numerically dependent, smallest singular value " +
                             std::to_string(smin),
                         smin);
  Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(N, s);
  return {geom, Q, SubspaceBasis::Origin::Exact};
}

/// ‖P_A − P_B‖: the sine of the largest principal angle for equal dimensions,
/// 1 when the dimensions differ.
inline double subspace_distance(const SubspaceBasis &A, const SubspaceBasis &B) {
  require(A.ambient() == B.ambient(), "subspace_distance: ambient dimension mismatch");
  if (A.dim() != B.dim())
    return 1.0;
  if (A.dim() == 0)
    return 0.0;
  Eigen::MatrixXcd M = A.columns - B.columns * (B.columns.adjoint() * A.columns);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
  Eigen::MatrixXcd R = qr.matrixQR().topRows(std::min(M.rows(), M.cols())).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R);
  return std::min(1.0, svd.singularValues()(0));
}

struct WedinReport {
  bool hypothesis_holds = false;
  std::string skipped_reason;
  double sigma_s_clean = 0.0;  // σ_s(H(y))
  double sigma_s_noisy = 0.0;  // σ_s(H(ỹ))
  double noise_norm = 0.0;     // ‖H(η)‖
  double projector_gap = 0.0;  // ‖P_U − P_Ũ‖
  double projector_bound = 0.0;    // (4/3)‖H(η)‖/σ_s(H(y))
  double wedin_bound = 0.0;    // ‖H(η)‖/σ_s(H(ỹ))
  double eta_l1 = 0.0, eta_l2 = 0.0, eta_linf = 0.0;
  double noise_bound_p1 = 0.0, noise_bound_p2 = 0.0, noise_bound_pinf = 0.0;
  bool dense = false;
  bool pass = false;
};

/// Both sides of the projector perturbation bounds and of the ℓ^p noise-norm
/// bound ‖H(η)‖ <= (4m+1)^{d/p'} ‖η‖_p for p ∈ {1, 2, ∞}.
inline WedinReport wedin_audit(const SampleSet &y, const SampleSet &eta, Eigen::Index s, std::uint64_t seed = 0) {
  y.validate();
  eta.validate();
  require(y.values.size() == eta.values.size(), "wedin_audit: sample sets differ in size");
  SampleSet noisy{y.geom, y.values + eta.values};
  HankelOperator Hy(y), He(eta), Ht(noisy);
  WedinReport rep;
  const Eigen::Index N = Hy.size();
  require(s >= 1 && s <= N, "wedin_audit: need 1 <= s <= N");
  rep.dense = N <= dense_cutoff;
  Eigen::MatrixXcd Uc, Ut;
  if (rep.dense) {
    Eigen::BDCSVD<Eigen::MatrixXcd> sy(Hy.dense(), Eigen::ComputeThinU), st(Ht.dense(), Eigen::ComputeThinU);
    Eigen::BDCSVD<Eigen::MatrixXcd> se(He.dense());
    rep.sigma_s_clean = sy.singularValues()(s - 1);
    rep.sigma_s_noisy = st.singularValues()(s - 1);
    rep.noise_norm = se.singularValues()(0);
    Uc = sy.matrixU().leftCols(s);
    Ut = st.matrixU().leftCols(s);
  } else {
    SvdOptions opt;
    opt.seed = seed;
    auto sy = truncated_svd(Hy, s, opt), st = truncated_svd(Ht, s, opt), se = truncated_svd(He, 1, opt);
    rep.sigma_s_clean = sy.values(s - 1);
    rep.sigma_s_noisy = st.values(s - 1);
    rep.noise_norm = se.values(0);
    Uc = sy.left;
    Ut = st.left;
  }
  rep.eta_l1 = eta.values.cwiseAbs().sum();
  rep.eta_l2 = eta.values.norm();
  rep.eta_linf = eta.values.size() ? eta.values.cwiseAbs().maxCoeff() : 0.0;
  const double side = y.geom.star_side(), d = y.geom.d;
  rep.noise_bound_p1 = rep.eta_l1;
  rep.noise_bound_p2 = std::pow(side, d / 2.0) * rep.eta_l2;
  rep.noise_bound_pinf = std::pow(side, d) * rep.eta_linf;
  const double slack = 1.0 + 1e-10;
  const bool noise_ok = rep.noise_norm <= rep.noise_bound_p1 * slack && rep.noise_norm <= rep.noise_bound_p2 * slack &&
                        rep.noise_norm <= rep.noise_bound_pinf * slack;
  rep.hypothesis_holds = 4.0 * rep.noise_norm <= rep.sigma_s_clean;
  if (!rep.hypothesis_holds) {
    rep.skipped_reason = "4‖H(η)‖ > σ_s(H(y))";
    rep.pass = noise_ok;
    return rep;
  }
  rep.projector_gap = subspace_distance({y.geom, Uc, SubspaceBasis::Origin::Exact},
                                        {y.geom, Ut, SubspaceBasis::Origin::Estimated});
  rep.projector_bound = (4.0 / 3.0) * rep.noise_norm / rep.sigma_s_clean;
  rep.wedin_bound = rep.sigma_s_noisy > 0.0 ? rep.noise_norm / rep.sigma_s_noisy : 1.0;
  const double abs_floor = 1e-12;
  rep.pass = noise_ok && rep.projector_gap <= rep.projector_bound * slack + abs_floor &&
             rep.projector_gap <= rep.wedin_bound * slack + abs_floor;
  return rep;
}

} // namespace gmusic
