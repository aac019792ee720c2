#pragma once
// Domains, metrics, lattice grids, separation and bottleneck matching.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gmusic/error.hpp"

namespace gmusic {

using Point = Eigen::VectorXd;
using PointSet = std::vector<Point>;

/// Wrap a real number to [0,1).
inline double wrap_unit(double t) {
  double w = t - std::floor(t);
  return w >= 1.0 ? 0.0 : w;
}

/// Wrap a real number to [-1/2,1/2).
inline double wrap_centered(double t) { return t - std::floor(t + 0.5); }

/// Parameter domain: the flat torus T^d = [0,1)^d or an axis-aligned box.
class Domain {
public:
  enum class Kind { Torus, Box };

  static Domain torus(int d) {
    require(d >= 1, "Domain::torus: dimension must be positive");
    Domain dom;
    dom.kind_ = Kind::Torus;
    dom.lower_ = Eigen::VectorXd::Zero(d);
    dom.upper_ = Eigen::VectorXd::Ones(d);
    return dom;
  }

  static Domain box(const Eigen::VectorXd &lower, const Eigen::VectorXd &upper) {
    require(lower.size() >= 1 && lower.size() == upper.size(),
            "Domain::box: bounds must be nonempty with equal dimension");
    for (Eigen::Index k = 0; k < lower.size(); ++k)
      require(std::isfinite(lower[k]) && std::isfinite(upper[k]) && lower[k] < upper[k],
              "Domain::box: need finite bounds with lower < upper");
    Domain dom;
    dom.kind_ = Kind::Box;
    dom.lower_ = lower;
    dom.upper_ = upper;
    return dom;
  }

  /// Cube [-h, h]^d.
  static Domain centered_box(int d, double half_width) {
    return box(Eigen::VectorXd::Constant(d, -half_width), Eigen::VectorXd::Constant(d, half_width));
  }

  Kind kind() const { return kind_; }
  bool is_torus() const { return kind_ == Kind::Torus; }
  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd &lower() const { return lower_; }
  const Eigen::VectorXd &upper() const { return upper_; }
  Eigen::VectorXd extent() const { return upper_ - lower_; }

  /// Torus points map to [0,1)^d; box points are clamped.
  Point canonicalize(const Point &p) const {
    check_dim(p);
    Point q(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k)
      q[k] = is_torus() ? wrap_unit(p[k]) : std::clamp(p[k], lower_[k], upper_[k]);
    return q;
  }

  bool contains(const Point &p) const {
    if (p.size() != lower_.size())
      return false;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (is_torus() ? !(p[k] >= 0.0 && p[k] < 1.0) : !(p[k] >= lower_[k] && p[k] <= upper_[k]))
        return false;
    }
    return true;
  }

  /// u - v, with torus coordinates wrapped to [-1/2,1/2).
  Point displacement(const Point &u, const Point &v) const {
    check_dim(u);
    check_dim(v);
    Point diff = u - v;
    if (is_torus())
      for (Eigen::Index k = 0; k < diff.size(); ++k)
        diff[k] = wrap_centered(diff[k]);
    return diff;
  }

  double distance(const Point &u, const Point &v) const { return displacement(u, v).norm(); }

  /// Largest possible distance between two domain points.
  double diameter() const {
    return is_torus() ? 0.5 * std::sqrt(static_cast<double>(dim())) : extent().norm();
  }

  std::string name() const { return is_torus() ? "torus" : "box"; }

private:
  void check_dim(const Point &p) const {
    if (p.size() != lower_.size())
      throw InvalidArgument("Domain: point dimension " + std::to_string(p.size()) +
                            " does not match domain dimension " + std::to_string(lower_.size()));
  }

  Kind kind_ = Kind::Torus;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

inline double torus_distance(const Point &u, const Point &v, int d) {
  require(u.size() == d && v.size() == d, "torus_distance: dimension mismatch");
  double acc = 0.0;
  for (int k = 0; k < d; ++k) {
    double t = wrap_centered(u[k] - v[k]);
    acc += t * t;
  }
  return std::sqrt(acc);
}

inline double euclidean_distance(const Point &u, const Point &v) {
  require(u.size() == v.size(), "euclidean_distance: dimension mismatch");
  return (u - v).norm();
}

/// Minimum pairwise distance. A single point has no pair, so the result is +inf.
inline double min_separation(const PointSet &pts, const Domain &domain) {
  require(!pts.empty(), "min_separation: empty point set");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pts.size(); ++j)
    for (std::size_t k = j + 1; k < pts.size(); ++k)
      best = std::min(best, domain.distance(pts[j], pts[k]));
  return best;
}

/// A finite set of domain points. Uniform grids are tensor lattices stored as a
/// descriptor (counts, spacing, origin) and enumerated lexicographically with
/// the first axis slowest; scattered grids store their points.
class Grid {
public:
  static Grid lattice(const Domain &domain, std::vector<long> counts) {
    require(static_cast<int>(counts.size()) == domain.dim(), "Grid::lattice: counts/dimension mismatch");
    Grid g;
    g.domain_ = domain;
    g.counts_ = std::move(counts);
    const int d = domain.dim();
    g.spacing_.resize(d);
    g.origin_.resize(d);
    double mesh_sq = 0.0;
    for (int k = 0; k < d; ++k) {
      require(g.counts_[k] >= 1, "Grid::lattice: counts must be positive");
      g.spacing_[k] = domain.extent()[k] / static_cast<double>(g.counts_[k]);
      // torus nodes sit at k*g, box nodes at cell centres
      g.origin_[k] = domain.is_torus() ? 0.0 : domain.lower()[k] + 0.5 * g.spacing_[k];
      mesh_sq += 0.25 * g.spacing_[k] * g.spacing_[k];
    }
    g.mesh_ = std::sqrt(mesh_sq);
    g.mesh_estimated_ = false;
    return g;
  }

  /// Scattered grid; the mesh norm is estimated against a probe lattice with
  /// probe_factor times the grid's per-axis density.
  static Grid scattered(const Domain &domain, PointSet points, int probe_factor = 4);

  bool uniform() const { return !counts_.empty(); }
  const Domain &domain() const { return domain_; }
  const std::vector<long> &counts() const { return counts_; }
  const Eigen::VectorXd &spacing() const { return spacing_; }
  double mesh() const { return mesh_; }
  bool mesh_estimated() const { return mesh_estimated_; }

  std::size_t size() const {
    if (!uniform())
      return points_.size();
    std::size_t n = 1;
    for (long c : counts_)
      n *= static_cast<std::size_t>(c);
    return n;
  }

  std::vector<long> multi_index(std::size_t i) const {
    std::vector<long> idx(counts_.size());
    for (std::size_t k = counts_.size(); k-- > 0;) {
      idx[k] = static_cast<long>(i % static_cast<std::size_t>(counts_[k]));
      i /= static_cast<std::size_t>(counts_[k]);
    }
    return idx;
  }

  std::size_t flat_index(const std::vector<long> &idx) const {
    std::size_t i = 0;
    for (std::size_t k = 0; k < counts_.size(); ++k)
      i = i * static_cast<std::size_t>(counts_[k]) + static_cast<std::size_t>(idx[k]);
    return i;
  }

  Point point(std::size_t i) const {
    if (!uniform())
      return points_.at(i);
    auto idx = multi_index(i);
    Point p(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
      p[static_cast<Eigen::Index>(k)] = origin_[static_cast<Eigen::Index>(k)] +
                                        spacing_[static_cast<Eigen::Index>(k)] * static_cast<double>(idx[k]);
    return p;
  }

private:
  Domain domain_;
  std::vector<long> counts_;
  Eigen::VectorXd spacing_;
  Eigen::VectorXd origin_;
  PointSet points_;
  double mesh_ = 0.0;
  bool mesh_estimated_ = false;
};

namespace detail {

// max over probe lattice nodes of the distance to the nearest point of pts
inline double probe_mesh(const Domain &domain, const PointSet &pts, long per_axis) {
  Grid probe = Grid::lattice(domain, std::vector<long>(static_cast<std::size_t>(domain.dim()), per_axis));
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    Point w = probe.point(i);
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto &p : pts)
      nearest = std::min(nearest, domain.distance(w, p));
    worst = std::max(worst, nearest);
  }
  return worst;
}

} // namespace detail

inline Grid Grid::scattered(const Domain &domain, PointSet points, int probe_factor) {
  require(!points.empty(), "Grid::scattered: empty grid");
  for (const auto &p : points)
    require(domain.contains(p), "Grid::scattered: point outside domain");
  Grid g;
  g.domain_ = domain;
  g.points_ = std::move(points);
  const double per_axis = std::ceil(std::pow(static_cast<double>(g.points_.size()), 1.0 / domain.dim()));
  g.mesh_ = detail::probe_mesh(domain, g.points_, static_cast<long>(probe_factor * per_axis));
  g.mesh_estimated_ = true;
  return g;
}

/// Covering radius of a grid. Closed form for lattices; probe estimate otherwise.
inline double mesh_norm(const Grid &grid) {
  require(grid.size() > 0, "mesh_norm: empty grid");
  return grid.mesh();
}

namespace detail {

// Kuhn's augmenting-path search on the threshold graph.
inline bool augment(std::size_t u, const std::vector<std::vector<std::size_t>> &adj,
                    std::vector<long> &match_right, std::vector<char> &seen) {
  for (std::size_t v : adj[u]) {
    if (seen[v])
      continue;
    seen[v] = 1;
    if (match_right[v] < 0 || augment(static_cast<std::size_t>(match_right[v]), adj, match_right, seen)) {
      match_right[v] = static_cast<long>(u);
      return true;
    }
  }
  return false;
}

inline bool has_perfect_matching(const std::vector<std::vector<double>> &cost, double threshold) {
  const std::size_t n = cost.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cost[i][j] <= threshold)
        adj[i].push_back(j);
  std::vector<long> match_right(n, -1);
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<char> seen(n, 0);
    if (!augment(u, adj, match_right, seen))
      return false;
  }
  return true;
}

} // namespace detail

/// Bottleneck assignment: min over permutations of the max paired distance.
/// Binary search over the sorted pairwise distances, each step a perfect-matching test.
inline double matching_distance(const PointSet &a, const PointSet &b, const Domain &domain) {
  require(a.size() == b.size(), "matching_distance: size mismatch");
  const std::size_t n = a.size();
  if (n == 0)
    return 0.0;
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  std::vector<double> candidates;
  candidates.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cost[i][j] = domain.distance(a[i], b[j]);
      candidates.push_back(cost[i][j]);
    }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (detail::has_perfect_matching(cost, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

/// Uniform lattice with the same power-of-two count on every axis, the
/// smallest one whose mesh is <= target_mesh.
inline Grid make_uniform_grid(const Domain &domain, double target_mesh,
                              std::size_t point_budget = std::size_t{1} << 26) {
  require(target_mesh > 0.0, "make_uniform_grid: target mesh must be positive");
  const int d = domain.dim();
  const Eigen::VectorXd ext = domain.extent();
  long n = 1;
  while (0.5 * ext.norm() / static_cast<double>(n) > target_mesh) {
    n *= 2;
    if (std::pow(static_cast<double>(n), d) > static_cast<double>(point_budget))
      throw InvalidArgument("make_uniform_grid: target mesh " + std::to_string(target_mesh) +
                            " needs more than " + std::to_string(point_budget) + " points");
  }
  return Grid::lattice(domain, std::vector<long>(static_cast<std::size_t>(d), n));
}

} // namespace gmusic
