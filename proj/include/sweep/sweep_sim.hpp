#pragma once

#include "sweep/model.hpp"
#include "sweep/trajectory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace sweep {

inline constexpr double kFeasTol = 1e-9;

// ---------------------------------------------------------------------------
// Euclidean projection onto C = {ψ ≤ 0}

namespace detail {

/// Solves y + λ∇ψ(y) = x by Newton's method, starting from `y`.
inline void resolvent(const ScalarField& psi, const Vec& x, double lambda, Vec& y) {
  const Eigen::Index n = x.size();
  for (int it = 0; it < 60; ++it) {
    const Vec r = y + lambda * psi.grad(y) - x;
    if (r.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) return;
    const Mat J = Mat::Identity(n, n) + lambda * psi.hess(y);
    y -= J.ldlt().solve(r);
  }
}

}  // namespace detail

/// Closest point of C to x. Solves the scalar dual equation ψ(y(λ)) = 0, y(λ) = (I + λ∇ψ)⁻¹x,
/// by Newton's method safeguarded with bisection.
inline Vec project_onto_C(const ProblemSpec& problem, const Vec& x, double tol = 1e-12) {
  require_dim(x.size(), problem.n(), "project_onto_C point");
  const auto& psi = problem.psi;
  const double px = psi.eval(x);
  require_finite(px, "psi", x);
  if (px <= 0.0) return x;

  const Eigen::Index n = x.size();
  const Vec gx = psi.grad(x);
  double lo = 0.0;
  double hi = std::max(px / std::max(gx.squaredNorm(), 1e-300), 1e-12);
  Vec y = x;
  for (int k = 0; k < 200; ++k) {
    detail::resolvent(psi, x, hi, y);
    if (psi.eval(y) <= 0.0) break;
    lo = hi;
    hi *= 2.0;
  }

  double lambda = hi;
  y = x;
  detail::resolvent(psi, x, lambda, y);
  double phi = psi.eval(y);
  for (int it = 0; it < 100; ++it) {
    const Vec g = psi.grad(y);
    const Vec kkt = y - x + lambda * g;
    const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    if (std::abs(phi) <= tol && kkt.lpNorm<Eigen::Infinity>() <= tol * scale) {
      if (phi > 0.0) {
        // pull onto the feasible side without breaking the KKT tolerance
        y -= (phi / std::max(g.squaredNorm(), 1e-300)) * g;
      }
      return y;
    }
    (phi > 0.0 ? lo : hi) = lambda;
    const Mat J = Mat::Identity(n, n) + lambda * psi.hess(y);
    const double dphi = -g.dot(J.ldlt().solve(g));
    double next = dphi < 0.0 ? lambda - phi / dphi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    lambda = next;
    detail::resolvent(psi, x, lambda, y);
    phi = psi.eval(y);
  }
  throw NoConvergenceError("project_onto_C: no convergence after 100 iterations", y, std::abs(phi));
}

// ---------------------------------------------------------------------------
// Simulators

namespace detail {

inline void check_initial_state(const ProblemSpec& problem, const Vec& x0) {
  require_dim(x0.size(), problem.n(), "initial state");
  if (problem.c0.empty()) {
    if ((x0 - problem.x0).lpNorm<Eigen::Infinity>() > 1e-12)
      throw InvalidArgumentError("initial state is not the singleton C0 = {x0}");
  } else {
    for (const auto& c : problem.c0)
      if (c.eval(x0) > 1e-12) throw InvalidArgumentError("initial state outside C0");
  }
  if (problem.psi.eval(x0) > kFeasTol) throw InvalidArgumentError("initial state outside C");
}

inline void check_control(const ProblemSpec& problem, const ControlSignal& control) {
  if (control.grid.N < 1) throw InvalidArgumentError("control grid is empty");
  require_dim(control.dim(), problem.m(), "control dimension");
}

}  // namespace detail

/// Moreau catch-up scheme x_{j+1} = proj_C(x_j + Δt f(x_j, u_j)).
inline StateTrajectory simulate_catchup(const ProblemSpec& problem, const ControlSignal& control,
                                        std::optional<Vec> x0 = std::nullopt) {
  detail::check_control(problem, control);
  const Vec start = x0 ? *x0 : problem.x0;
  detail::check_initial_state(problem, start);
  const double dt = control.grid.dt();
  StateTrajectory tr{control.grid, {start}, control.values, std::nullopt};
  tr.states.reserve(static_cast<std::size_t>(control.grid.N + 1));
  for (int j = 0; j < control.grid.N; ++j) {
    const Vec& x = tr.states.back();
    const Vec drift = problem.f.eval(x, control.values[j]);
    require_finite(drift, "f", x);
    tr.states.push_back(project_onto_C(problem, x + dt * drift));
  }
  return tr;
}

/// Penalty field F(x, u) = f(x, u) − γ e^{γψ(x)} ∇ψ(x). Returns a non-finite vector when the
/// exponential overflows.
inline Vec penalty_field(const ProblemSpec& problem, double gamma, const Vec& x, const Vec& u) {
  const double s = gamma * problem.psi.eval(x);
  if (!(s < 700.0)) return Vec::Constant(x.size(), std::numeric_limits<double>::infinity());
  return problem.f.eval(x, u) - gamma * std::exp(s) * problem.psi.grad(x);
}

/// D_x F = D_x f − γ e^{γψ} (∇²ψ + γ ∇ψ∇ψᵀ).
inline Mat penalty_field_jacobian(const ProblemSpec& problem, double gamma, const Vec& x, const Vec& u) {
  const double e = gamma * std::exp(gamma * problem.psi.eval(x));
  const Vec gp = problem.psi.grad(x);
  return problem.f.jac_x(x, u) - e * (problem.psi.hess(x) + gamma * gp * gp.transpose());
}

/// One backward-Euler step y = x + τ F(y, u), solved by damped Newton iteration.
inline Vec implicit_penalty_step(const ProblemSpec& problem, double gamma, const Vec& x, const Vec& u, double tau,
                                 int step_index = 0) {
  const Eigen::Index n = x.size();
  Vec y = x;
  auto residual = [&](const Vec& z) -> Vec { return z - x - tau * penalty_field(problem, gamma, z, u); };
  Vec r = residual(y);
  if (!r.allFinite()) throw NewtonDivergenceError("penalty step: non-finite residual at start", gamma, step_index, INFINITY);
  double rn = r.norm();
  for (int it = 0; it < 100; ++it) {
    if (rn <= 1e-14 * (1.0 + y.norm())) return y;
    const Mat J = Mat::Identity(n, n) - tau * penalty_field_jacobian(problem, gamma, y, u);
    const Vec d = -J.partialPivLu().solve(r);
    double a = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, a *= 0.5) {
      const Vec yt = y + a * d;
      const Vec rt = residual(yt);
      if (rt.allFinite() && rt.norm() < (1.0 - 1e-4 * a) * rn) {
        y = yt;
        r = rt;
        rn = rt.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (rn <= 1e-10 * (1.0 + y.norm())) return y;
      throw NewtonDivergenceError("penalty step: line search failed", gamma, step_index, rn);
    }
  }
  if (rn <= 1e-10 * (1.0 + y.norm())) return y;
  throw NewtonDivergenceError("penalty step: Newton did not converge", gamma, step_index, rn);
}

/// Integrates ẋ = f(x, u) − γ e^{γψ(x)} ∇ψ(x) by implicit Euler with `substeps` substeps per interval.
inline StateTrajectory simulate_penalty(const ProblemSpec& problem, const ControlSignal& control, double gamma,
                                        int substeps, std::optional<Vec> x0 = std::nullopt) {
  if (!(gamma > 0.0)) throw InvalidArgumentError("simulate_penalty: gamma must be positive");
  if (substeps < 1) throw InvalidArgumentError("simulate_penalty: substeps must be at least 1");
  detail::check_control(problem, control);
  const Vec start = x0 ? *x0 : problem.x0;
  detail::check_initial_state(problem, start);
  const double tau = control.grid.dt() / substeps;
  StateTrajectory tr{control.grid, {start}, control.values, std::nullopt};
  Vec x = start;
  for (int j = 0; j < control.grid.N; ++j) {
    for (int s = 0; s < substeps; ++s) x = implicit_penalty_step(problem, gamma, x, control.values[j], tau, j);
    tr.states.push_back(x);
  }
  return tr;
}

/// Relaxation level δ = max_j h(x_j, u_j) along the penalty trajectory started at x0.
inline double compute_delta(const ProblemSpec& problem, const ControlSignal& control, double gamma, const Vec& x0,
                            int substeps = 10) {
  const StateTrajectory tr = simulate_penalty(problem, control, gamma, substeps, x0);
  double delta = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < control.grid.N; ++j) delta = std::max(delta, problem.h.eval(tr.states[j], tr.controls[j]));
  return delta;
}

// ---------------------------------------------------------------------------
// Penalty vs catch-up study

struct ConvergenceRow {
  double gamma = 0.0;
  int N = 0;
  double gap = 0.0;
};

struct ConvergenceTable {
  std::vector<double> gammas;
  std::vector<int> grids;
  std::vector<ConvergenceRow> rows;  // gamma-major

  double gap(std::size_t gi, std::size_t ni) const { return rows[gi * grids.size() + ni].gap; }

  /// Gap strictly decreasing in γ for grid column `ni`.
  bool decreasing_in_gamma(std::size_t ni) const {
    for (std::size_t g = 1; g < gammas.size(); ++g)
      if (!(gap(g, ni) < gap(g - 1, ni))) return false;
    return true;
  }
  bool decreasing_in_gamma() const {
    for (std::size_t ni = 0; ni < grids.size(); ++ni)
      if (!decreasing_in_gamma(ni)) return false;
    return true;
  }
  /// Largest factor by which the gap changes between successive grids at fixed γ.
  double max_refinement_factor(std::size_t gi) const {
    double worst = 1.0;
    for (std::size_t ni = 1; ni < grids.size(); ++ni) {
      const double a = gap(gi, ni - 1);
      const double b = gap(gi, ni);
      const double lo = std::min(a, b);
      if (lo <= 0.0) continue;
      worst = std::max(worst, std::max(a, b) / lo);
    }
    return worst;
  }
};

/// Sup-norm gap between penalty and catch-up trajectories for every (γ, N). The control is a
/// function of time, sampled at the left node of every interval.
inline ConvergenceTable convergence_study(const ProblemSpec& problem, const std::function<Vec(double)>& control,
                                          const std::vector<double>& gammas, const std::vector<int>& grids,
                                          int substeps = 10) {
  if (gammas.empty() || grids.empty()) throw InvalidArgumentError("convergence_study: empty gamma or grid list");
  for (std::size_t i = 1; i < gammas.size(); ++i)
    if (!(gammas[i] > gammas[i - 1])) throw InvalidArgumentError("convergence_study: gammas must increase");
  ConvergenceTable table{gammas, grids, {}};
  std::vector<StateTrajectory> catchup;
  for (int N : grids) {
    Grid grid(N);
    std::vector<Vec> u;
    for (int j = 0; j < N; ++j) u.push_back(control(grid.t(j)));
    catchup.push_back(simulate_catchup(problem, ControlSignal(grid, u)));
  }
  for (double gamma : gammas) {
    for (std::size_t ni = 0; ni < grids.size(); ++ni) {
      const StateTrajectory pen = simulate_penalty(problem, catchup[ni].control_signal(), gamma, substeps);
      table.rows.push_back({gamma, grids[ni], sup_gap(pen, catchup[ni])});
    }
  }
  return table;
}

/// sup_t |x_h(t) − x*(t)| for the step-function interpolant x_h(t) = x_j on [t_j, t_{j+1}),
/// sampled with `samples` points per interval including the right limit.
inline double step_sup_error(const StateTrajectory& traj, const std::function<Vec(double)>& exact, int samples = 16) {
  const double dt = traj.grid.dt();
  double err = (traj.states.back() - exact(1.0)).norm();
  for (int j = 0; j < traj.grid.N; ++j) {
    for (int k = 0; k <= samples; ++k) {
      const double t = traj.grid.t(j) + dt * static_cast<double>(k) / samples;
      err = std::max(err, (traj.states[j] - exact(std::min(t, 1.0))).norm());
    }
  }
  return err;
}

/// Largest node-wise error max_j |x_j − x*(t_j)|.
inline double node_sup_error(const StateTrajectory& traj, const std::function<Vec(double)>& exact) {
  double err = 0.0;
  for (int j = 0; j <= traj.grid.N; ++j) err = std::max(err, (traj.states[j] - exact(traj.grid.t(j))).norm());
  return err;
}

}  // namespace sweep
