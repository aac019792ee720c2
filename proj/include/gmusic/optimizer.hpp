#pragma once
// Gradient-MUSIC: thresholding initialization, cluster extraction, fixed-step
// gradient descent, and the end-to-end estimation pipeline.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "gmusic/error.hpp"
#include "gmusic/geometry.hpp"
#include "gmusic/hankel.hpp"
#include "gmusic/kernel.hpp"
#include "gmusic/landscape.hpp"
#include "gmusic/signal.hpp"

namespace gmusic {

struct DescentConfig {
  double h = 0.0;
  long n = 0;
  double stop_grad_tol = 0.0;
};

struct Cluster {
  Point representative;
  std::size_t rep_index = 0;
  double rep_value = 0.0;
  std::size_t size = 0;
};

/// Connected components of {ω ∈ G : q(ω) <= α1} under ℓ∞ lattice adjacency
/// (torus wrap on torus domains), one argmin representative per component.
/// Components are listed in order of their first grid index.
inline std::vector<Cluster> threshold_and_cluster(const Grid &grid, const Eigen::VectorXd &values, double alpha1) {
  require(grid.uniform(), "threshold_and_cluster: uniform lattice grid required");
  require(static_cast<std::size_t>(values.size()) == grid.size(), "threshold_and_cluster: values/grid size mismatch");
  const int d = grid.domain().dim();
  const bool wrap = grid.domain().is_torus();
  std::unordered_set<std::size_t> below;
  std::vector<std::size_t> order;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (values[i] <= alpha1) {
      below.insert(static_cast<std::size_t>(i));
      order.push_back(static_cast<std::size_t>(i));
    }
  // neighbor offsets in {-1,0,1}^d \ {0}
  std::vector<std::vector<int>> offsets;
  const long n_off = static_cast<long>(std::pow(3.0, d));
  for (long t = 0; t < n_off; ++t) {
    std::vector<int> off(static_cast<std::size_t>(d));
    long r = t;
    bool zero = true;
    for (int k = d - 1; k >= 0; --k) {
      off[static_cast<std::size_t>(k)] = static_cast<int>(r % 3) - 1;
      zero = zero && off[static_cast<std::size_t>(k)] == 0;
      r /= 3;
    }
    if (!zero)
      offsets.push_back(std::move(off));
  }
  std::unordered_set<std::size_t> seen;
  std::vector<Cluster> out;
  for (std::size_t start : order) {
    if (seen.count(start))
      continue;
    Cluster cl;
    cl.rep_index = start;
    cl.rep_value = values[static_cast<Eigen::Index>(start)];
    std::deque<std::size_t> queue{start};
    seen.insert(start);
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      ++cl.size;
      const double v = values[static_cast<Eigen::Index>(cur)];
      if (v < cl.rep_value || (v == cl.rep_value && cur < cl.rep_index)) {
        cl.rep_value = v;
        cl.rep_index = cur;
      }
      const auto idx = grid.multi_index(cur);
      for (const auto &off : offsets) {
        std::vector<long> nb(idx);
        bool inside = true;
        for (int k = 0; k < d; ++k) {
          const long n = grid.counts()[static_cast<std::size_t>(k)];
          long c = nb[static_cast<std::size_t>(k)] + off[static_cast<std::size_t>(k)];
          if (wrap)
            c = ((c % n) + n) % n;
          else if (c < 0 || c >= n)
            inside = false;
          nb[static_cast<std::size_t>(k)] = c;
        }
        if (!inside)
          continue;
        const std::size_t j = grid.flat_index(nb);
        if (below.count(j) && !seen.count(j)) {
          seen.insert(j);
          queue.push_back(j);
        }
      }
    }
    cl.representative = grid.point(cl.rep_index);
    out.push_back(std::move(cl));
  }
  return out;
}

struct DescentResult {
  Point x;
  long iterations = 0;
  bool stopped_early = false;
  std::vector<Point> path;     // iterates including x0 (only when recorded)
  std::vector<double> values;  // q along the path (only when recorded)
};

/// θ_{k+1} = θ_k − h ∇q(θ_k), n steps or until ‖∇q‖ <= stop_grad_tol.
template <class Objective>
DescentResult gradient_descent(const Objective &f, const Domain &domain, const Point &x0, const DescentConfig &cfg,
                               bool record = false) {
  require(cfg.h > 0.0 && cfg.n >= 0, "gradient_descent: need h > 0 and n >= 0");
  DescentResult res;
  res.x = domain.is_torus() ? domain.canonicalize(x0) : x0;
  if (record) {
    res.path.push_back(res.x);
    res.values.push_back(f.value(res.x));
  }
  for (long k = 0; k < cfg.n; ++k) {
    Eigen::VectorXd g = f.gradient(res.x);
    if (!g.allFinite())
      throw InternalError("gradient_descent: non-finite gradient");
    if (g.norm() <= cfg.stop_grad_tol) {
      res.stopped_early = true;
      break;
    }
    Point next = res.x - cfg.h * g;
    res.x = domain.is_torus() ? domain.canonicalize(next) : next;
    ++res.iterations;
    if (record) {
      res.path.push_back(res.x);
      res.values.push_back(f.value(res.x));
    }
  }
  return res;
}

inline DescentResult gradient_descent(const MusicEvaluator &ev, const Point &x0, const DescentConfig &cfg,
                                      bool record = false) {
  return gradient_descent(ev, ev.geometry().omega, x0, cfg, record);
}

struct Hyperparams {
  double mesh_target = 0.0;
  double alpha1 = 0.5;
  double h = 0.0;
  long n = 0;
};

/// Mesh κ/(4πmd) (cube) or κ/(4πm√d) (ball), α1 = 1/2, step sizes 3/(8π²m(m+1)) or (d+2)/(16π²m²),
/// and n from the contraction factor so that the optimization error reaches eps_target.
inline Hyperparams default_hyperparams(const KernelGeometry &geom, double eps_target, double kappa = 1.0) {
  require(eps_target > 0.0 && eps_target < 1.0, "default_hyperparams: eps_target must lie in (0,1)");
  Hyperparams hp;
  const double m = geom.m, d = geom.d;
  hp.mesh_target = kappa * default_tau(geom);
  if (geom.is_cube()) {
    hp.h = 3.0 / (8.0 * pi * pi * m * (m + 1.0));
    hp.n = static_cast<long>(std::ceil(std::log(1.0 / eps_target) / std::log(15.0 / 14.0)));
  } else {
    hp.h = (d + 2.0) / (16.0 * pi * pi * m * m);
    hp.n = static_cast<long>(std::ceil(std::log(1.0 / eps_target) / std::log(14.0 / 13.0)));
  }
  return hp;
}

struct PipelineOptions {
  Eigen::Index order_hint = 0;   // expected s; 0 = grow the SVD until the threshold bites
  bool fix_order = false;        // use order_hint as the model order
  double ratio_threshold = 0.25; // model order: largest k with σ_k/σ_1 >= threshold
  double kappa = 1.0;            // grid mesh = κ τ
  double alpha1 = 0.5;
  double eps_target = 0.0;       // <= 0: derived from the singular gap
  double svd_tol = 1e-9;
  std::uint64_t seed = 0;
  std::size_t grid_budget = std::size_t{1} << 26;
  bool record_trajectories = false;
  bool keep_grid_values = false;
  std::optional<ParameterConfig> truth;
};

struct PipelineReport {
  Eigen::Index detected_order = 0;
  std::vector<double> singular_values;
  std::string svd_method;
  std::vector<Cluster> clusters;
  PointSet initializers;
  PointSet estimates;
  std::vector<cplx> amplitudes;
  std::vector<double> final_values;
  std::vector<long> iterations;
  std::vector<std::vector<Point>> trajectories;
  std::vector<std::vector<double>> trajectory_values;
  double matching_error = std::numeric_limits<double>::quiet_NaN();
  double eps_target = 0.0;
  Hyperparams hyper;
  std::vector<long> grid_counts;
  double grid_mesh = 0.0;
  long matvecs = 0;
  std::map<std::string, double> seconds;
  std::vector<std::string> flags;
  Eigen::VectorXd grid_values; // kept only on request
};

namespace detail {

class StageTimer {
public:
  explicit StageTimer(std::map<std::string, double> &sink) : sink_(sink) {}
  void lap(const std::string &stage) {
    auto now = std::chrono::steady_clock::now();
    sink_[stage] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

private:
  std::map<std::string, double> &sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

} // namespace detail

/// Hankel → truncated SVD → model order → estimated basis → FFT grid values →
/// thresholding and clustering → gradient descent per cluster → amplitudes.
inline PipelineReport run_gradient_music(const SampleSet &samples, const PipelineOptions &opt = {}) {
  samples.validate();
  PipelineReport rep;
  detail::StageTimer timer(rep.seconds);
  const KernelGeometry &geom = samples.geom;
  HankelOperator H(samples);
  const Eigen::Index N = H.size();
  timer.lap("hankel");

  SvdOptions svd_opt;
  svd_opt.tol = opt.svd_tol;
  svd_opt.seed = opt.seed;
  // triplets below the order threshold never enter the estimate
  svd_opt.significance = opt.ratio_threshold;
  Eigen::Index k = std::min<Eigen::Index>(N, opt.order_hint > 0 ? 2 * opt.order_hint + 4 : 8);
  SingularSpectrum spec;
  while (true) {
    spec = truncated_svd(H, k, svd_opt);
    rep.detected_order = opt.fix_order && opt.order_hint > 0 ? opt.order_hint
                                                             : detect_model_order(spec, opt.ratio_threshold);
    if (rep.detected_order < k || k == N || opt.fix_order)
      break;
    k = std::min<Eigen::Index>(N, 2 * k);
  }
  rep.svd_method = spec.method;
  rep.singular_values.assign(spec.values.data(), spec.values.data() + spec.values.size());
  timer.lap("svd");
  if (rep.detected_order == 0) {
    rep.flags.push_back("model order 0");
    rep.matvecs = H.matvec_count();
    return rep;
  }
  const Eigen::Index s = rep.detected_order;

  if (opt.eps_target > 0.0) {
    rep.eps_target = opt.eps_target;
  } else {
    const double ratio = s < spec.values.size() && spec.values(s - 1) > 0.0 ? spec.values(s) / spec.values(s - 1) : 0.0;
    rep.eps_target = std::clamp(1e-3 * ratio, 1e-15, 1e-2);
  }
  rep.hyper = default_hyperparams(geom, rep.eps_target, opt.kappa);
  rep.hyper.alpha1 = opt.alpha1;

  MusicEvaluator ev = MusicEvaluator::from_basis(spec.left_basis(geom, s));
  Grid grid = make_uniform_grid(geom.omega, rep.hyper.mesh_target, opt.grid_budget);
  rep.grid_counts = grid.counts();
  rep.grid_mesh = grid.mesh();
  GridValues gv = grid_evaluate(ev, grid);
  timer.lap("grid");

  rep.clusters = threshold_and_cluster(grid, gv.values, rep.hyper.alpha1);
  if (opt.keep_grid_values)
    rep.grid_values = std::move(gv.values);
  if (static_cast<Eigen::Index>(rep.clusters.size()) > s) {
    rep.flags.push_back("cluster count " + std::to_string(rep.clusters.size()) + " exceeds model order " +
                        std::to_string(s));
    std::stable_sort(rep.clusters.begin(), rep.clusters.end(),
                     [](const Cluster &a, const Cluster &b) { return a.rep_value < b.rep_value; });
    rep.clusters.resize(static_cast<std::size_t>(s));
    std::sort(rep.clusters.begin(), rep.clusters.end(),
              [](const Cluster &a, const Cluster &b) { return a.rep_index < b.rep_index; });
  } else if (static_cast<Eigen::Index>(rep.clusters.size()) < s) {
    rep.flags.push_back("cluster count " + std::to_string(rep.clusters.size()) + " below model order " +
                        std::to_string(s));
  }
  timer.lap("cluster");

  DescentConfig dc{rep.hyper.h, rep.hyper.n, 1e-12 * std::sqrt(hessian_at_zero(geom).trace())};
  for (const auto &cl : rep.clusters) {
    rep.initializers.push_back(cl.representative);
    DescentResult dr = gradient_descent(ev, cl.representative, dc, opt.record_trajectories);
    rep.estimates.push_back(dr.x);
    rep.iterations.push_back(dr.iterations);
    rep.final_values.push_back(ev.value(dr.x));
    if (opt.record_trajectories) {
      rep.trajectories.push_back(std::move(dr.path));
      rep.trajectory_values.push_back(std::move(dr.values));
    }
  }
  timer.lap("descent");

  if (!rep.estimates.empty()) {
    try {
      rep.amplitudes = estimate_amplitudes(rep.estimates, samples);
    } catch (const IllConditioned &e) {
      rep.flags.push_back(e.what());
    }
  }
  timer.lap("amplitudes");
  if (opt.truth) {
    if (opt.truth->theta.size() == rep.estimates.size())
      rep.matching_error = matching_distance(opt.truth->theta, rep.estimates, geom.omega);
    else
      rep.flags.push_back("estimate count differs from truth");
  }
  rep.matvecs = H.matvec_count();
  return rep;
}

} // namespace gmusic
