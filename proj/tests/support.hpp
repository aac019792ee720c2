#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

#include "gmusic/gmusic.hpp"

namespace testing_support {

using gmusic::Point;

inline double rel_err(double got, double want, double floor = 1.0) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

inline double rel_err(const Eigen::MatrixXd &got, const Eigen::MatrixXd &want, double floor = 1.0) {
  return (got - want).norm() / std::max(want.norm(), floor);
}

inline Point random_point(std::mt19937_64 &rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Point p(d);
  for (int k = 0; k < d; ++k)
    p[k] = u(rng);
  return p;
}

// central differences, step h per coordinate
inline Eigen::VectorXd fd_gradient(const std::function<double(const Point &)> &f, const Point &x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Point e = Point::Unit(x.size(), k) * h;
    g[k] = (f(x + e) - f(x - e)) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Point &)> &g, const Point &x, double h) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd J(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Point e = Point::Unit(d, k) * h;
    J.col(k) = (g(x + e) - g(x - e)) / (2.0 * h);
  }
  return J;
}

} // namespace testing_support
