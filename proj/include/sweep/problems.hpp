#pragma once

#include "sweep/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sweep::problems {

/// Known optimal process of a catalog problem.
struct Reference {
  std::function<Vec(double)> state;
  std::function<Vec(double)> control;
  std::string control_description;
  double objective = 0.0;
  std::optional<std::pair<double, double>> contact;  // contact interval, empty if none
  std::optional<double> sliding_slack;               // ξ on the contact arc
};

struct CatalogEntry {
  ProblemSpec spec;
  std::optional<Reference> reference;
};

// ---------------------------------------------------------------------------
// Building blocks

/// ψ(x) = Σ xᵢ²/aᵢ² − 1.
inline ScalarField ellipsoid(Vec semi_axes) {
  const int n = static_cast<int>(semi_axes.size());
  const Vec w = semi_axes.array().square().inverse().matrix();
  ScalarField s;
  s.dim = n;
  s.eval = [w](const Vec& x) { return (w.array() * x.array().square()).sum() - 1.0; };
  s.grad = [w](const Vec& x) -> Vec { return 2.0 * w.cwiseProduct(x); };
  s.hess = [w](const Vec&) -> Mat { return Mat(2.0 * w.asDiagonal()); };
  return s;
}

inline ScalarField ball(int n, double radius) { return ellipsoid(Vec::Constant(n, radius)); }

/// ψ(x) = |x|² − r² written unscaled, so that ∇ψ = 2x.
inline ScalarField ball_unscaled(int n, double radius) {
  ScalarField s;
  s.dim = n;
  const double r2 = radius * radius;
  s.eval = [r2](const Vec& x) { return x.squaredNorm() - r2; };
  s.grad = [](const Vec& x) -> Vec { return 2.0 * x; };
  s.hess = [n](const Vec&) -> Mat { return 2.0 * Mat::Identity(n, n); };
  return s;
}

/// g(x) = ⟨c, x⟩.
inline ScalarField linear(Vec c) {
  ScalarField s;
  s.dim = static_cast<int>(c.size());
  s.eval = [c](const Vec& x) { return c.dot(x); };
  s.grad = [c](const Vec&) -> Vec { return c; };
  s.hess = [c](const Vec&) -> Mat { return Mat::Zero(c.size(), c.size()); };
  return s;
}

/// f(x, u) = u.
inline ControlledVectorField identity_drift(int n) {
  ControlledVectorField f;
  f.state_dim = n;
  f.control_dim = n;
  f.eval = [](const Vec&, const Vec& u) -> Vec { return u; };
  f.jac_x = [n](const Vec&, const Vec&) -> Mat { return Mat::Zero(n, n); };
  f.jac_u = [n](const Vec&, const Vec&) -> Mat { return Mat::Identity(n, n); };
  return f;
}

/// h(x, u) = |u|² − r².
inline MixedConstraint control_ball(int n, double radius) {
  MixedConstraint h;
  const double r2 = radius * radius;
  h.eval = [r2](const Vec&, const Vec& u) { return u.squaredNorm() - r2; };
  h.grad_x = [n](const Vec&, const Vec&) -> Vec { return Vec::Zero(n); };
  h.grad_u = [](const Vec&, const Vec& u) -> Vec { return 2.0 * u; };
  return h;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

inline CatalogEntry disk_push() {
  ProblemSpec p;
  p.name = "disk-push";
  p.f = identity_drift(2);
  p.psi = ball_unscaled(2, 1.0);
  p.h = control_ball(2, 2.0);
  p.g = linear(vec({-1.0, 0.0}));
  p.x0 = Vec::Zero(2);
  p.rho = 4.0;
  p.control_box = 2.0;

  Reference r;
  r.state = [](double t) { return vec({std::min(2.0 * t, 1.0), 0.0}); };
  r.control = [](double) { return vec({2.0, 0.0}); };
  r.control_description = "u(t) = (2, 0)";
  r.objective = -1.0;
  r.contact = std::make_pair(0.5, 1.0);
  return {std::move(p), std::move(r)};
}

inline CatalogEntry interval_1d() {
  ProblemSpec p;
  p.name = "interval-1d";
  p.f = identity_drift(1);
  p.psi = ball_unscaled(1, 1.0);
  p.h = control_ball(1, 1.0);
  p.g = linear(vec({-1.0}));
  p.x0 = vec({0.5});
  p.rho = 2.0;
  p.control_box = 2.0;

  Reference r;
  r.state = [](double t) { return vec({std::min(0.5 + t, 1.0)}); };
  r.control = [](double) { return vec({1.0}); };
  r.control_description = "u(t) = 1";
  r.objective = -1.0;
  r.contact = std::make_pair(0.5, 1.0);
  r.sliding_slack = 0.5;  // 0 = u − ξψ'(1) = 1 − 2ξ
  return {std::move(p), std::move(r)};
}

inline CatalogEntry interior_classical() {
  ProblemSpec p;
  p.name = "interior-classical";
  p.f = identity_drift(2);
  p.psi = ball_unscaled(2, 5.0);
  p.h = control_ball(2, 1.0);
  p.g = linear(vec({-1.0, 0.0}));
  p.x0 = Vec::Zero(2);
  p.rho = 2.0;
  p.control_box = 2.0;

  Reference r;
  r.state = [](double t) { return vec({t, 0.0}); };
  r.control = [](double) { return vec({1.0, 0.0}); };
  r.control_description = "u(t) = (1, 0)";
  r.objective = -1.0;
  return {std::move(p), std::move(r)};
}

inline CatalogEntry ellipse_steer() {
  ProblemSpec p;
  p.name = "ellipse-steer";
  p.f = identity_drift(2);
  p.psi = ellipsoid(vec({2.0, 1.0}));
  MixedConstraint h;
  h.eval = [](const Vec& x, const Vec& u) { return x[0] + u[0] - 2.0; };
  h.grad_x = [](const Vec&, const Vec&) { return vec({1.0, 0.0}); };
  h.grad_u = [](const Vec&, const Vec&) { return vec({1.0, 0.0}); };
  p.h = std::move(h);
  p.g = linear(vec({-1.0, -1.0}));
  p.x0 = vec({0.0, -0.5});
  p.rho = 6.0;
  p.control_box = 2.0;
  return {std::move(p), std::nullopt};
}

inline const std::vector<std::string>& list_catalog() {
  static const std::vector<std::string> names{"disk-push", "interval-1d", "interior-classical", "ellipse-steer"};
  return names;
}

class UnknownProblemError : public Error {
 public:
  using Error::Error;
};

inline CatalogEntry get(const std::string& name) {
  if (name == "disk-push") return disk_push();
  if (name == "interval-1d") return interval_1d();
  if (name == "interior-classical") return interior_classical();
  if (name == "ellipse-steer") return ellipse_steer();
  throw UnknownProblemError("unknown catalog problem '" + name + "'");
}

/// Reference trajectory sampled on a grid (controls at the left node of each interval).
inline StateTrajectory sample_reference(const Reference& ref, Grid grid) {
  StateTrajectory tr{grid, {}, {}, std::nullopt};
  for (int j = 0; j <= grid.N; ++j) tr.states.push_back(ref.state(grid.t(j)));
  for (int j = 0; j < grid.N; ++j) tr.controls.push_back(ref.control(grid.t(j)));
  return tr;
}

}  // namespace sweep::problems
