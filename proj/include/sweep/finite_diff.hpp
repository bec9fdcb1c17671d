#pragma once

#include "sweep/core.hpp"

#include <algorithm>
#include <cmath>

namespace sweep::fd {

/// Central-difference step for coordinate value `xi`.
inline double step(double xi, double base = 1e-5) { return base * (1.0 + std::abs(xi)); }

template <class F>
Vec gradient(F&& f, const Vec& x, double base = 1e-5) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step(x[i], base);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Jacobian of a vector map, rows = outputs.
template <class F>
Mat jacobian(F&& f, const Vec& x, double base = 1e-5) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step(x[i], base);
    xp[i] = x[i] + h;
    const Vec fp = f(xp);
    xp[i] = x[i] - h;
    const Vec fm = f(xp);
    xp[i] = x[i];
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

/// Relative discrepancy ‖a − b‖∞ / max(1, ‖b‖∞), `b` being the finite-difference reference.
inline double relative_error(const Mat& analytic, const Mat& reference) {
  if (analytic.size() == 0) return 0.0;
  const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
  return (analytic - reference).cwiseAbs().maxCoeff() / scale;
}

}  // namespace sweep::fd
