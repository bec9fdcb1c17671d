#pragma once

#include "sweep/core.hpp"
#include "sweep/nlp.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sweep {

enum class SolveStatus { converged, max_iter, infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

struct KktResiduals {
  double stationarity = 0.0;
  double primal_feas = 0.0;
  double dual_feas = 0.0;
  double complementarity = 0.0;

  double max() const { return std::max({stationarity, primal_feas, dual_feas, complementarity}); }
};

struct SolveResult {
  Vec z_star;
  Vec mu_eq;
  Vec mu_ineq;  // includes folded bound rows after the declared inequalities
  SolveStatus status = SolveStatus::max_iter;
  KktResiduals kkt;
  int iterations = 0;        // outer
  int inner_iterations = 0;  // summed
  double objective = 0.0;
  double penalty = 0.0;      // final augmented-Lagrangian ρ
};

struct SolverOptions {
  double tol = 1e-8;
  int max_outer = 50;
  int max_inner = 500;
  double rho0 = 10.0;
  double rho_max = 1e12;
  double multiplier_bound = 1e8;
  int lbfgs_memory = 10;
  bool use_hessian = true;  // Newton inner iterations when the program supplies a Lagrangian Hessian
  bool trace = false;       // per-outer-iteration line on stderr
};

/// The four KKT residual norms at (z, μ_E, μ_I).
inline KktResiduals kkt_residual(const NlpProblem& nlp_in, const Vec& z, const Vec& mu_eq, const Vec& mu_ineq) {
  const NlpProblem nlp = fold_bounds(nlp_in);
  require_dim(z.size(), nlp.n_vars, "kkt_residual z");
  require_dim(mu_eq.size(), nlp.n_eq, "kkt_residual mu_eq");
  require_dim(mu_ineq.size(), nlp.n_ineq, "kkt_residual mu_ineq");
  Vec grad = nlp.objective_grad(z);
  const Vec cE = nlp.eval_eq(z);
  const Vec cI = nlp.eval_ineq(z);
  if (nlp.n_eq > 0) grad += nlp.eval_eq_jac(z).transpose() * mu_eq;
  if (nlp.n_ineq > 0) grad += nlp.eval_ineq_jac(z).transpose() * mu_ineq;
  KktResiduals r;
  r.stationarity = inf_norm(grad);
  r.primal_feas = std::max(inf_norm(cE), nlp.n_ineq > 0 ? cI.cwiseMax(0.0).maxCoeff() : 0.0);
  r.dual_feas = nlp.n_ineq > 0 ? (-mu_ineq).cwiseMax(0.0).maxCoeff() : 0.0;
  r.complementarity = nlp.n_ineq > 0 ? inf_norm(mu_ineq.cwiseProduct(cI)) : 0.0;
  return r;
}

namespace detail {

/// PHR augmented Lagrangian for fixed (μ_E, μ_I, ρ).
class AugmentedLagrangian {
 public:
  AugmentedLagrangian(const NlpProblem& nlp, const Vec& mu_eq, const Vec& mu_ineq, double rho)
      : nlp_(nlp), mu_eq_(mu_eq), mu_ineq_(mu_ineq), rho_(rho) {}

  double value(const Vec& z) const {
    double phi = nlp_.objective(z);
    if (nlp_.n_eq > 0) {
      const Vec c = nlp_.eq(z);
      phi += mu_eq_.dot(c) + 0.5 * rho_ * c.squaredNorm();
    }
    if (nlp_.n_ineq > 0) {
      const Vec c = nlp_.ineq(z);
      const Vec s = (mu_ineq_ + rho_ * c).cwiseMax(0.0);
      phi += (s.squaredNorm() - mu_ineq_.squaredNorm()) / (2.0 * rho_);
    }
    return phi;
  }

  Vec gradient(const Vec& z) const {
    Vec g = nlp_.objective_grad(z);
    if (nlp_.n_eq > 0) g += nlp_.eq_jac(z).transpose() * shifted_eq(z);
    if (nlp_.n_ineq > 0) g += nlp_.ineq_jac(z).transpose() * shifted_ineq(z);
    return g;
  }

  /// Generalized Hessian ∇²L(z, μ̂) + ρJ_EᵀJ_E + ρJ_AᵀJ_A over the currently active inequality rows.
  SpMat hessian(const Vec& z) const {
    const Vec we = nlp_.n_eq > 0 ? shifted_eq(z) : Vec();
    const Vec wi = nlp_.n_ineq > 0 ? shifted_ineq(z) : Vec();
    SpMat H = nlp_.lagrangian_hessian(z, 1.0, nlp_.n_eq > 0 ? we : Vec::Zero(0), nlp_.n_ineq > 0 ? wi : Vec::Zero(0));
    if (nlp_.n_eq > 0) {
      const SpMat J = nlp_.eq_jac(z);
      H += rho_ * SpMat(J.transpose() * J);
    }
    if (nlp_.n_ineq > 0) {
      const SpMat J = nlp_.ineq_jac(z);
      Vec d(wi.size());
      for (Eigen::Index i = 0; i < wi.size(); ++i) d[i] = wi[i] > 0.0 ? rho_ : 0.0;
      const SpMat JtD = J.transpose() * d.asDiagonal();
      H += SpMat(JtD * J);
    }
    return H;
  }

  Vec shifted_eq(const Vec& z) const { return mu_eq_ + rho_ * nlp_.eq(z); }
  Vec shifted_ineq(const Vec& z) const { return (mu_ineq_ + rho_ * nlp_.ineq(z)).cwiseMax(0.0); }

 private:
  const NlpProblem& nlp_;
  const Vec& mu_eq_;
  const Vec& mu_ineq_;
  double rho_;
};

struct InnerOutcome {
  Vec z;
  int iterations = 0;
  bool stalled = false;
};

/// Backtracking Armijo search along d. Non-finite trial values count as failures.
inline std::optional<double> armijo(const AugmentedLagrangian& al, const Vec& z, const Vec& d, double phi0,
                                    double slope, double& phi_new) {
  double step = 1.0;
  for (int k = 0; k < 60; ++k) {
    const Vec trial = z + step * d;
    const double phi = al.value(trial);
    if (std::isfinite(phi) && phi <= phi0 + 1e-4 * step * slope) {
      phi_new = phi;
      return step;
    }
    step *= 0.5;
  }
  return std::nullopt;
}

inline InnerOutcome newton_inner(const AugmentedLagrangian& al, Vec z, double omega, int max_inner) {
  InnerOutcome out;
  double sigma = 0.0;
  double phi = al.value(z);
  Eigen::SimplicialLDLT<SpMat> ldlt;
  for (int it = 0; it < max_inner; ++it) {
    const Vec g = al.gradient(z);
    if (!g.allFinite()) throw NonFiniteError("augmented Lagrangian gradient is non-finite", z);
    if (inf_norm(g) <= omega) break;
    ++out.iterations;
    const SpMat H = al.hessian(z);
    const double scale = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    Vec d;
    bool ok = false;
    for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
      SpMat Hs = H;
      if (sigma > 0.0) {
        SpMat I(H.rows(), H.cols());
        I.setIdentity();
        Hs += sigma * I;
      }
      ldlt.compute(Hs);
      if (ldlt.info() == Eigen::Success) {
        const Vec D = ldlt.vectorD();
        const double dmax = D.cwiseAbs().maxCoeff();
        if (D.minCoeff() > 1e-13 * dmax) {
          d = ldlt.solve(-g);
          ok = d.allFinite() && g.dot(d) < 0.0;
        }
      }
      if (!ok) sigma = std::max(10.0 * sigma, 1e-10 * scale);
    }
    if (!ok) {
      d = -g;
      sigma = std::max(sigma, 1e-4 * scale);
    }
    double phi_new = phi;
    const auto step = armijo(al, z, d, phi, g.dot(d), phi_new);
    if (!step) {
      // Retry along the steepest-descent direction before giving up.
      const auto sd = armijo(al, z, -g, phi, -g.squaredNorm(), phi_new);
      if (!sd) {
        out.stalled = true;
        break;
      }
      z -= *sd * g;
      sigma = std::max(10.0 * sigma, 1e-8 * scale);
    } else {
      z += *step * d;
      if (*step == 1.0) {
        sigma *= 0.1;
        if (sigma < 1e-12 * scale) sigma = 0.0;
      } else {
        sigma = std::max(10.0 * sigma, 1e-10 * scale);
      }
    }
    if (std::abs(phi - phi_new) <= 1e-16 * std::max(1.0, std::abs(phi)) && inf_norm(g) <= 1e3 * omega) {
      phi = phi_new;
      break;
    }
    phi = phi_new;
  }
  out.z = std::move(z);
  return out;
}

inline InnerOutcome lbfgs_inner(const AugmentedLagrangian& al, Vec z, double omega, int max_inner, int memory) {
  InnerOutcome out;
  std::deque<Vec> S, Y;
  double phi = al.value(z);
  Vec g = al.gradient(z);
  for (int it = 0; it < max_inner; ++it) {
    if (!g.allFinite()) throw NonFiniteError("augmented Lagrangian gradient is non-finite", z);
    if (inf_norm(g) <= omega) break;
    ++out.iterations;
    // Two-loop recursion.
    Vec q = g;
    std::vector<double> alpha(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      alpha[k] = S[k].dot(q) / Y[k].dot(S[k]);
      q -= alpha[k] * Y[k];
    }
    if (!S.empty()) q *= S.back().dot(Y.back()) / Y.back().squaredNorm();
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta = Y[k].dot(q) / Y[k].dot(S[k]);
      q += (alpha[k] - beta) * S[k];
    }
    Vec d = -q;
    if (g.dot(d) >= 0.0) {
      d = -g;
      S.clear();
      Y.clear();
    }
    double phi_new = phi;
    auto step = armijo(al, z, d, phi, g.dot(d), phi_new);
    if (!step) {
      d = -g;
      S.clear();
      Y.clear();
      step = armijo(al, z, d, phi, g.dot(d), phi_new);
      if (!step) {
        out.stalled = true;
        break;
      }
    }
    const Vec z_new = z + *step * d;
    const Vec g_new = al.gradient(z_new);
    const Vec s = z_new - z;
    const Vec y = g_new - g;
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      if (static_cast<int>(S.size()) > memory) {
        S.pop_front();
        Y.pop_front();
      }
    }
    z = z_new;
    g = g_new;
    phi = phi_new;
  }
  out.z = std::move(z);
  return out;
}

/// Constraint violation measure that accounts for multiplier complementarity.
inline double al_violation(const NlpProblem& nlp, const Vec& z, const Vec& mu_ineq, double rho) {
  double v = inf_norm(nlp.eval_eq(z));
  if (nlp.n_ineq > 0) {
    const Vec c = nlp.ineq(z);
    for (Eigen::Index i = 0; i < c.size(); ++i) v = std::max(v, std::abs(std::min(-c[i], mu_ineq[i] / rho)));
  }
  return v;
}

}  // namespace detail

/// Augmented-Lagrangian solve with optional warm-start multipliers.
inline SolveResult solve(const NlpProblem& nlp_in, const Vec& z0, const SolverOptions& opt = {},
                         const Vec* mu_eq0 = nullptr, const Vec* mu_ineq0 = nullptr) {
  if (!(opt.tol > 0.0 && opt.tol <= 1e-2)) throw InvalidArgumentError("solve: tol must lie in (0, 1e-2]");
  if (opt.max_outer < 1) throw InvalidArgumentError("solve: max_outer must be ≥ 1");
  const NlpProblem nlp = fold_bounds(nlp_in);
  require_dim(z0.size(), nlp.n_vars, "solve z0");
  require_finite(z0, "solve initial point", z0);
  require_finite(nlp.objective(z0), "objective", z0);
  require_finite(nlp.eval_eq(z0), "equality constraints", z0);
  require_finite(nlp.eval_ineq(z0), "inequality constraints", z0);

  Vec mu_eq = Vec::Zero(nlp.n_eq);
  Vec mu_ineq = Vec::Zero(nlp.n_ineq);
  if (mu_eq0 && mu_eq0->size() == nlp.n_eq) mu_eq = *mu_eq0;
  if (mu_ineq0 && mu_ineq0->size() > 0) {
    const Eigen::Index k = std::min<Eigen::Index>(mu_ineq0->size(), nlp.n_ineq);
    mu_ineq.head(k) = mu_ineq0->head(k).cwiseMax(0.0);
  }

  const bool newton = opt.use_hessian && static_cast<bool>(nlp.lagrangian_hessian);
  SolveResult res;
  Vec z = z0;
  double rho = opt.rho0;
  double prev_violation = std::numeric_limits<double>::infinity();
  int stuck = 0;
  res.status = SolveStatus::max_iter;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    res.iterations = outer + 1;
    const double omega = std::max(0.5 * opt.tol, 1e-2 * std::pow(0.1, outer));
    detail::AugmentedLagrangian al(nlp, mu_eq, mu_ineq, rho);
    const auto inner = newton ? detail::newton_inner(al, z, omega, opt.max_inner)
                              : detail::lbfgs_inner(al, z, omega, opt.max_inner, opt.lbfgs_memory);
    res.inner_iterations += inner.iterations;
    z = inner.z;

    const double bound = opt.multiplier_bound;
    if (nlp.n_eq > 0) mu_eq = al.shifted_eq(z).cwiseMax(-bound).cwiseMin(bound);
    if (nlp.n_ineq > 0) mu_ineq = al.shifted_ineq(z).cwiseMin(bound);

    res.kkt = kkt_residual(nlp, z, mu_eq, mu_ineq);
    if (opt.trace)
      std::fprintf(stderr, "outer %2d rho %.1e inner %4d%s st %.2e pf %.2e cp %.2e F %.12g\n", outer, rho,
                   inner.iterations, inner.stalled ? " (stalled)" : "", res.kkt.stationarity, res.kkt.primal_feas,
                   res.kkt.complementarity, nlp.objective(z));
    if (res.kkt.max() <= opt.tol) {
      res.status = SolveStatus::converged;
      break;
    }
    const double violation = detail::al_violation(nlp, z, mu_ineq, rho);
    if (violation > opt.tol && violation > 0.25 * prev_violation) {
      if (rho >= opt.rho_max && res.kkt.primal_feas > opt.tol) {
        if (++stuck >= 3) {
          res.status = SolveStatus::infeasible;
          break;
        }
      }
      rho = std::min(10.0 * rho, opt.rho_max);
    } else {
      stuck = 0;
    }
    prev_violation = violation;
  }

  res.z_star = z;
  res.mu_eq = mu_eq;
  res.mu_ineq = mu_ineq;
  res.objective = nlp.objective(z);
  res.penalty = rho;
  return res;
}

inline SolveResult solve(const NlpProblem& nlp, const Vec& z0, double tol, int max_outer = 50) {
  SolverOptions opt;
  opt.tol = tol;
  opt.max_outer = max_outer;
  return solve(nlp, z0, opt);
}

/// Raised by multistart when no start converges; lists the per-start statuses.
class AllStartsFailedError : public Error {
 public:
  AllStartsFailedError(const std::string& what, std::vector<SolveStatus> statuses)
      : Error(what), statuses_(std::move(statuses)) {}
  const std::vector<SolveStatus>& statuses() const { return statuses_; }

 private:
  std::vector<SolveStatus> statuses_;
};

/// Best converged result: lowest objective, then lowest stationarity residual, then lowest start index.
inline SolveResult multistart(const NlpProblem& nlp, const std::vector<Vec>& starts, const SolverOptions& opt = {}) {
  if (starts.empty()) throw InvalidArgumentError("multistart: at least one start required");
  std::optional<SolveResult> best;
  std::vector<SolveStatus> statuses;
  for (const auto& z0 : starts) {
    SolveResult r = solve(nlp, z0, opt);
    statuses.push_back(r.status);
    if (r.status != SolveStatus::converged) continue;
    // Values within tol count as ties so that starts reaching the same point keep the lowest index.
    const bool better = !best || r.objective < best->objective - opt.tol ||
                        (r.objective <= best->objective + opt.tol &&
                         r.kkt.stationarity < best->kkt.stationarity - opt.tol);
    if (better) best = std::move(r);
  }
  if (!best) {
    std::string msg = "multistart: no start converged (";
    for (std::size_t k = 0; k < statuses.size(); ++k) msg += (k ? ", " : "") + std::string(to_string(statuses[k]));
    throw AllStartsFailedError(msg + ")", statuses);
  }
  return *best;
}

inline SolveResult multistart(const NlpProblem& nlp, const std::vector<Vec>& starts, double tol) {
  SolverOptions opt;
  opt.tol = tol;
  return multistart(nlp, starts, opt);
}

}  // namespace sweep
