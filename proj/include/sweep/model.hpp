#pragma once

#include "sweep/core.hpp"
#include "sweep/finite_diff.hpp"
#include "sweep/trajectory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace sweep {

/// Smooth scalar map on ℝ^d with analytic gradient and optional Hessian.
struct ScalarField {
  int dim = 0;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;  // may be empty

  bool has_hess() const { return static_cast<bool>(hess); }
};

/// Drift f(x, u) with its partial Jacobians.
struct ControlledVectorField {
  int state_dim = 0;
  int control_dim = 0;
  std::function<Vec(const Vec&, const Vec&)> eval;
  std::function<Mat(const Vec&, const Vec&)> jac_x;
  std::function<Mat(const Vec&, const Vec&)> jac_u;
};

/// Scalar mixed state/control constraint h(x, u) ≤ 0.
struct MixedConstraint {
  std::function<double(const Vec&, const Vec&)> eval;
  std::function<Vec(const Vec&, const Vec&)> grad_x;
  std::function<Vec(const Vec&, const Vec&)> grad_u;
};

/// Running cost L(t, x, u).
struct RunningCost {
  std::function<double(double, const Vec&, const Vec&)> eval;
  std::function<Vec(double, const Vec&, const Vec&)> grad_x;
  std::function<Vec(double, const Vec&, const Vec&)> grad_u;
};

/// Full data of the controlled sweeping problem.
///
/// The sweeping set is C = {ψ ≤ 0}. The initial set C0 is {c0ᵢ ≤ 0 for all i}; with an empty
/// list it is the singleton {x0}. `x0` is always the nominal initial state used by the
/// simulators. `control_box` bounds the region in which controls are sampled by the
/// diagnostics; it is not a constraint of the problem.
struct ProblemSpec {
  std::string name;
  ControlledVectorField f;
  ScalarField psi;
  MixedConstraint h;
  ScalarField g;
  std::optional<RunningCost> L;
  std::vector<ScalarField> c0;
  Vec x0;
  double rho = 1.0;
  double control_box = 2.0;

  int n() const { return f.state_dim; }
  int m() const { return f.control_dim; }
  bool c0_is_singleton() const { return c0.empty(); }

  void validate() const {
    if (n() <= 0 || m() <= 0) throw InvalidArgumentError(name + ": state and control dimensions must be positive");
    if (!f.eval || !f.jac_x || !f.jac_u) throw InvalidArgumentError(name + ": drift callbacks missing");
    if (!psi.eval || !psi.grad || !psi.hess) throw InvalidArgumentError(name + ": psi needs eval, grad and hess");
    if (!h.eval || !h.grad_x || !h.grad_u) throw InvalidArgumentError(name + ": mixed constraint callbacks missing");
    if (!g.eval || !g.grad) throw InvalidArgumentError(name + ": terminal cost callbacks missing");
    require_dim(psi.dim, n(), "psi dimension");
    require_dim(g.dim, n(), "g dimension");
    require_dim(x0.size(), n(), "x0 dimension");
    for (const auto& c : c0) require_dim(c.dim, n(), "c0 dimension");
    if (!(rho > 0.0)) throw InvalidArgumentError(name + ": rho must be positive");
    if (!(psi.eval(Vec::Zero(n())) < 0.0)) throw InvalidArgumentError(name + ": 0 must lie in the interior of C");
  }

  /// Objective of a sampled process: g(x_N) plus the left Riemann sum of L.
  double objective(const StateTrajectory& traj) const {
    double J = g.eval(traj.states.back());
    if (L) {
      const double dt = traj.grid.dt();
      for (int j = 0; j < traj.grid.N; ++j) J += dt * L->eval(traj.grid.t(j), traj.states[j], traj.controls[j]);
    }
    return J;
  }
};

// ---------------------------------------------------------------------------
// Normal cone of C

struct NormalRay {
  enum class Kind { interior, boundary, outside };
  Kind kind = Kind::interior;
  Vec generator;  // ∇ψ(x) on the boundary, empty otherwise
};

inline NormalRay normal_ray(const ProblemSpec& problem, const Vec& x, double tol) {
  if (!(tol > 0.0)) throw InvalidArgumentError("normal_ray: tol must be positive");
  require_dim(x.size(), problem.n(), "normal_ray point");
  const double v = problem.psi.eval(x);
  require_finite(v, "psi", x);
  if (v < -tol) return {NormalRay::Kind::interior, Vec()};
  if (v > tol) return {NormalRay::Kind::outside, Vec()};
  Vec grad = problem.psi.grad(x);
  require_finite(grad, "psi gradient", x);
  if (grad.norm() < 1e-10)
    throw DegenerateGradientError("normal_ray: vanishing gradient of psi on the boundary");
  return {NormalRay::Kind::boundary, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Geometry helpers

/// Radius r > 0 with ψ(r·d) = 0 along the ray from the origin, if the ray leaves C before r_max.
inline std::optional<double> boundary_radius(const ScalarField& psi, const Vec& direction, double r_max = 1e6) {
  double lo = 0.0;
  double hi = 1.0;
  while (psi.eval(hi * direction) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > r_max) return std::nullopt;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi.eval(mid * direction) <= 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Half-width of a box that comfortably contains C, from axis-aligned boundary searches.
inline double containing_box(const ProblemSpec& problem) {
  double r = 0.0;
  for (int i = 0; i < problem.n(); ++i) {
    for (double s : {1.0, -1.0}) {
      Vec d = Vec::Zero(problem.n());
      d[i] = s;
      if (auto b = boundary_radius(problem.psi, d, 1e3)) r = std::max(r, *b);
    }
  }
  return r > 0.0 ? 1.5 * r : 2.0;
}

namespace detail {

inline Vec uniform_box(std::mt19937_64& rng, int dim, double half_width) {
  std::uniform_real_distribution<double> dist(-half_width, half_width);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = dist(rng);
  return v;
}

inline Vec unit_direction(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vec v(dim);
  do {
    for (int i = 0; i < dim; ++i) v[i] = dist(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Assumption checks

struct Violation {
  std::string assumption;  // "H1".."H6", "interior", "H3-coercivity", ...
  Vec witness;
  std::string detail;
};

struct AssumptionReport {
  double M_est = 0.0;    // sampled sup of |f| and |D_x f|
  double eta_est = 0.0;  // half the sampled min of |∇ψ| on ∂C
  bool convexity_ok = true;
  bool coercivity_ok = true;
  bool h_bounded_ok = true;
  bool c0_subset_ok = true;
  bool g_lipschitz_ok = true;
  double h_sup = 0.0;
  double g_lipschitz_est = 0.0;
  int boundary_samples = 0;
  std::vector<Violation> violations;

  bool clean() const { return violations.empty(); }
  /// Smallest admissible penalty parameter 2M/η.
  double min_gamma() const { return eta_est > 0.0 ? 2.0 * M_est / eta_est : std::numeric_limits<double>::infinity(); }
};

inline AssumptionReport check_assumptions(const ProblemSpec& problem, int sample_budget, std::uint64_t seed) {
  if (sample_budget < 100) throw InvalidArgumentError("check_assumptions: sample_budget must be at least 100");
  const int n = problem.n();
  const int m = problem.m();
  std::mt19937_64 rng(seed);
  AssumptionReport rep;
  auto violate = [&](std::string id, Vec w, std::string detail) {
    rep.violations.push_back({std::move(id), std::move(w), std::move(detail)});
  };

  const Vec origin = Vec::Zero(n);
  if (!(problem.psi.eval(origin) < 0.0)) violate("interior", origin, "psi(0) >= 0");

  // H3: boundary sampling by radial root-finding, coercivity along every probe ray.
  const int n_dirs = std::max(16, sample_budget / 10);
  double min_grad = std::numeric_limits<double>::infinity();
  double r_max_seen = 0.0;
  for (int k = 0; k < n_dirs; ++k) {
    const Vec d = detail::unit_direction(rng, n);
    const auto r = boundary_radius(problem.psi, d);
    if (!r) {
      rep.coercivity_ok = false;
      violate("H3-coercivity", 1e6 * d, "psi stays non-positive along the ray");
      continue;
    }
    const Vec xb = *r * d;
    r_max_seen = std::max(r_max_seen, *r);
    const double gn = problem.psi.grad(xb).norm();
    ++rep.boundary_samples;
    if (!std::isfinite(gn)) {
      violate("H3", xb, "non-finite gradient of psi on the boundary");
      continue;
    }
    if (gn < min_grad) min_grad = gn;
    if (gn < 1e-10) violate("H3", xb, "gradient of psi vanishes on the boundary");
  }
  rep.eta_est = rep.boundary_samples > 0 && std::isfinite(min_grad) ? 0.5 * min_grad : 0.0;

  const double box = r_max_seen > 0.0 ? 1.5 * r_max_seen : 2.0;

  // H3 convexity: Hessian of ψ positive semidefinite at sampled points.
  const int n_hess = std::max(10, sample_budget / 10);
  for (int k = 0; k < n_hess; ++k) {
    const Vec x = detail::uniform_box(rng, n, box);
    const Mat H = problem.psi.hess(x);
    if (!H.allFinite()) {
      rep.convexity_ok = false;
      violate("H3", x, "non-finite Hessian of psi");
      continue;
    }
    const Mat Hs = 0.5 * (H + H.transpose());
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(Hs, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (lmin < -1e-8 * (1.0 + Hs.norm())) {
      rep.convexity_ok = false;
      violate("H3", x, "Hessian of psi is not positive semidefinite");
    }
  }

  // H1 on sampled (x, u) with x ∈ C and u ∈ Ω(x) ∩ box; H4 and H6 on the same draws.
  int drawn = 0;
  for (int k = 0; k < sample_budget; ++k) {
    Vec x;
    bool found = false;
    for (int tries = 0; tries < 100 && !found; ++tries) {
      x = detail::uniform_box(rng, n, r_max_seen > 0.0 ? r_max_seen : 1.0);
      found = problem.psi.eval(x) <= 0.0;
    }
    if (!found) continue;
    Vec u;
    found = false;
    for (int tries = 0; tries < 100 && !found; ++tries) {
      u = detail::uniform_box(rng, m, problem.control_box);
      const double hv = problem.h.eval(x, u);
      if (!std::isfinite(hv)) break;
      found = hv <= 0.0;
    }
    const double hv = problem.h.eval(x, u);
    const Vec hx = problem.h.grad_x(x, u);
    const Vec hu = problem.h.grad_u(x, u);
    if (!std::isfinite(hv) || !hx.allFinite() || !hu.allFinite()) {
      rep.h_bounded_ok = false;
      violate("H4", x, "mixed constraint or its gradient is not finite");
      continue;
    }
    rep.h_sup = std::max(rep.h_sup, std::abs(hv));
    const Vec gg = problem.g.grad(x);
    if (!gg.allFinite()) {
      rep.g_lipschitz_ok = false;
      violate("H6", x, "gradient of g is not finite");
    } else {
      rep.g_lipschitz_est = std::max(rep.g_lipschitz_est, gg.norm());
    }
    if (!found) continue;
    const Vec fv = problem.f.eval(x, u);
    const Mat fx = problem.f.jac_x(x, u);
    if (!fv.allFinite() || !fx.allFinite()) {
      violate("H1", x, "drift or its Jacobian is not finite");
      continue;
    }
    const double jac_norm = fx.size() == 0 ? 0.0 : Eigen::JacobiSVD<Mat>(fx).singularValues()(0);
    rep.M_est = std::max({rep.M_est, fv.norm(), jac_norm});
    ++drawn;
  }
  if (drawn == 0) violate("H1", Vec::Zero(n), "no admissible (x, u) sample found");

  // H5: sampled points of C0 lie in C.
  std::vector<Vec> c0_points{problem.x0};
  if (!problem.c0.empty()) {
    for (int k = 0; k < sample_budget; ++k) {
      const Vec x = detail::uniform_box(rng, n, box);
      const bool inside = std::all_of(problem.c0.begin(), problem.c0.end(),
                                      [&](const ScalarField& c) { return c.eval(x) <= 0.0; });
      if (inside) c0_points.push_back(x);
    }
  }
  for (const auto& x : c0_points) {
    if (problem.psi.eval(x) > 1e-12) {
      rep.c0_subset_ok = false;
      violate("H5", x, "point of C0 outside C");
      break;
    }
  }
  if (!(rep.eta_est > 0.0) && rep.coercivity_ok) violate("H3", Vec::Zero(n), "boundary gradient bound not established");
  return rep;
}

// ---------------------------------------------------------------------------
// Derivative verification

struct GradientCheckReport {
  std::vector<std::pair<std::string, double>> fields;

  double worst() const {
    double w = 0.0;
    for (const auto& [name, err] : fields) w = std::max(w, err);
    return w;
  }
  std::string worst_field() const {
    std::string name;
    double w = -1.0;
    for (const auto& [n, err] : fields)
      if (err > w) {
        w = err;
        name = n;
      }
    return name;
  }
  double get(const std::string& name) const {
    for (const auto& [n, err] : fields)
      if (n == name) return err;
    return 0.0;
  }
};

/// Worst relative discrepancy between analytic and central-difference derivatives of every
/// problem function over seeded probe points in a box around C.
inline GradientCheckReport gradient_check(const ProblemSpec& problem, int n_points, std::uint64_t seed) {
  if (n_points < 1) throw InvalidArgumentError("gradient_check: n_points must be at least 1");
  const int n = problem.n();
  const int m = problem.m();
  const double box = containing_box(problem);
  std::mt19937_64 rng(seed);

  double e_fx = 0, e_fu = 0, e_psi = 0, e_psih = 0, e_hx = 0, e_hu = 0, e_g = 0, e_gh = 0, e_Lx = 0, e_Lu = 0, e_c0 = 0;
  for (int k = 0; k < n_points; ++k) {
    const Vec x = detail::uniform_box(rng, n, box);
    const Vec u = detail::uniform_box(rng, m, problem.control_box);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

    const Vec fv = problem.f.eval(x, u);
    require_finite(fv, "f", x);
    const Mat fx = problem.f.jac_x(x, u);
    const Mat fu = problem.f.jac_u(x, u);
    require_finite(Eigen::Map<const Vec>(fx.data(), fx.size()), "f jac_x", x);
    require_finite(Eigen::Map<const Vec>(fu.data(), fu.size()), "f jac_u", x);
    e_fx = std::max(e_fx, fd::relative_error(fx, fd::jacobian([&](const Vec& y) { return problem.f.eval(y, u); }, x)));
    e_fu = std::max(e_fu, fd::relative_error(fu, fd::jacobian([&](const Vec& w) { return problem.f.eval(x, w); }, u)));

    require_finite(problem.psi.eval(x), "psi", x);
    const Vec pg = problem.psi.grad(x);
    require_finite(pg, "psi gradient", x);
    e_psi = std::max(e_psi, fd::relative_error(pg, fd::gradient(problem.psi.eval, x)));
    if (problem.psi.has_hess()) {
      const Mat H = problem.psi.hess(x);
      e_psih = std::max(e_psih, fd::relative_error(H, fd::jacobian(problem.psi.grad, x)));
    }

    require_finite(problem.h.eval(x, u), "h", x);
    const Vec hx = problem.h.grad_x(x, u);
    const Vec hu = problem.h.grad_u(x, u);
    require_finite(hx, "h grad_x", x);
    require_finite(hu, "h grad_u", x);
    e_hx = std::max(e_hx, fd::relative_error(hx, fd::gradient([&](const Vec& y) { return problem.h.eval(y, u); }, x)));
    e_hu = std::max(e_hu, fd::relative_error(hu, fd::gradient([&](const Vec& w) { return problem.h.eval(x, w); }, u)));

    require_finite(problem.g.eval(x), "g", x);
    const Vec gg = problem.g.grad(x);
    require_finite(gg, "g gradient", x);
    e_g = std::max(e_g, fd::relative_error(gg, fd::gradient(problem.g.eval, x)));
    if (problem.g.has_hess()) e_gh = std::max(e_gh, fd::relative_error(problem.g.hess(x), fd::jacobian(problem.g.grad, x)));

    if (problem.L) {
      const auto& L = *problem.L;
      require_finite(L.eval(t, x, u), "L", x);
      e_Lx = std::max(e_Lx, fd::relative_error(L.grad_x(t, x, u), fd::gradient([&](const Vec& y) { return L.eval(t, y, u); }, x)));
      e_Lu = std::max(e_Lu, fd::relative_error(L.grad_u(t, x, u), fd::gradient([&](const Vec& w) { return L.eval(t, x, w); }, u)));
    }
    for (const auto& c : problem.c0) e_c0 = std::max(e_c0, fd::relative_error(c.grad(x), fd::gradient(c.eval, x)));
  }

  GradientCheckReport rep;
  rep.fields = {{"f_x", e_fx}, {"f_u", e_fu}, {"psi_grad", e_psi}, {"psi_hess", e_psih}, {"h_x", e_hx},
                {"h_u", e_hu}, {"g_grad", e_g}};
  if (problem.g.has_hess()) rep.fields.emplace_back("g_hess", e_gh);
  if (problem.L) {
    rep.fields.emplace_back("L_x", e_Lx);
    rep.fields.emplace_back("L_u", e_Lu);
  }
  if (!problem.c0.empty()) rep.fields.emplace_back("c0_grad", e_c0);
  return rep;
}

// ---------------------------------------------------------------------------
// Regularity of the mixed constraint along a trajectory

struct RegularityMargin {
  std::optional<double> margin;  // min |∇_u h| over active nodes
  int active_count = 0;
  double active_tol = 0.0;
  int worst_node = -1;

  static constexpr double kNonRegularThreshold = 1e-6;
  bool regular() const { return !margin || *margin >= kNonRegularThreshold; }
};

/// Default activity band 1e-6·(1 + max_j |h(x_j, u_j)|).
inline double default_active_tol(const ProblemSpec& problem, const StateTrajectory& traj) {
  double hmax = 0.0;
  for (int j = 0; j < traj.grid.N; ++j) hmax = std::max(hmax, std::abs(problem.h.eval(traj.states[j], traj.controls[j])));
  return 1e-6 * (1.0 + hmax);
}

inline RegularityMargin regularity_margin(const ProblemSpec& problem, const StateTrajectory& traj,
                                          std::optional<double> active_tol = std::nullopt) {
  traj.validate();
  require_dim(traj.state_dim(), problem.n(), "trajectory state dimension");
  require_dim(traj.control_dim(), problem.m(), "trajectory control dimension");
  RegularityMargin out;
  out.active_tol = active_tol ? *active_tol : default_active_tol(problem, traj);
  for (int j = 0; j < traj.grid.N; ++j) {
    const Vec& x = traj.states[j];
    const Vec& u = traj.controls[j];
    if (std::abs(problem.h.eval(x, u)) > out.active_tol) continue;
    ++out.active_count;
    const double gu = problem.h.grad_u(x, u).norm();
    if (!out.margin || gu < *out.margin) {
      out.margin = gu;
      out.worst_node = j;
    }
  }
  return out;
}

}  // namespace sweep
