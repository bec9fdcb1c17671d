#pragma once

#include "sweep/model.hpp"
#include "sweep/nlp_solver.hpp"
#include "sweep/transcribe.hpp"
#include "sweep/trajectory.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sweep {

/// Time discretization the discrete adjoint is paired with.
enum class AdjointScheme { explicit_euler, implicit_euler };

inline const char* to_string(AdjointScheme s) {
  return s == AdjointScheme::implicit_euler ? "implicit_euler" : "explicit_euler";
}

/// Multipliers of the maximum principle for a regular mixed constraint, on the grid.
struct RegularCertificate {
  AdjointScheme scheme = AdjointScheme::implicit_euler;
  double gamma = 0.0;               // 0 for a certificate without penalty terms
  double lambda0 = 1.0;
  std::vector<Vec> p;               // nodes 0..N
  std::vector<double> nu;           // nodes 0..N−1
  std::vector<double> xi;           // nodes 0..N
  std::vector<double> eta;          // nodes 0..N, positive atoms
  std::vector<double> eta_signed;   // nodes 0..N, Δtγ²e^{γψ}⟨p, ∇ψ⟩
  double kappa_obs = 0.0;
  double scale = 1.0;               // divisor applied to (λ0, p, ν) by the normalization

  int N() const { return static_cast<int>(nu.size()); }
};

/// Multipliers of the maximum principle in the non-regular case, on the grid.
/// Interval quantities (z1, z3, w, ζ1, ζ3, ϖ, cap) have a zero entry at node N.
struct NonRegularCertificate {
  double lambda0 = 1.0;
  double epsilon = 0.0;
  std::vector<double> z1, z2, z3, w;
  std::vector<double> zeta1, zeta2, zeta3, varpi;
  std::vector<double> cap;          // truncation-bound multiplier densities (diagnostic)
  std::vector<Vec> lambda, alpha, p;
  double scale = 1.0;

  int N() const { return static_cast<int>(lambda.size()) - 1; }
};

struct ConditionResult {
  std::string id;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  int worst_node = -1;
  bool diagnostic = false;  // reported, not part of the verdict
};

struct ResidualReport {
  std::string kind;  // "regular" | "nonregular"
  std::vector<ConditionResult> conditions;
  std::vector<std::string> notes;

  bool passed() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionResult& c) { return c.diagnostic || c.pass; });
  }
  const ConditionResult& get(const std::string& id) const {
    for (const auto& c : conditions)
      if (c.id == id) return c;
    throw InvalidArgumentError("no condition named " + id);
  }
  std::vector<std::string> failed() const {
    std::vector<std::string> out;
    for (const auto& c : conditions)
      if (!c.diagnostic && !c.pass) out.push_back(c.id);
    return out;
  }
  void add(std::string id, double residual, double tol, int worst, bool le = true) {
    ConditionResult c;
    c.id = std::move(id);
    c.residual = residual;
    c.tolerance = tol;
    c.pass = le ? residual <= tol : residual > tol;
    c.worst_node = worst;
    conditions.push_back(std::move(c));
  }
  void add_diagnostic(std::string id, double value, int worst) {
    ConditionResult c;
    c.id = std::move(id);
    c.residual = value;
    c.tolerance = std::numeric_limits<double>::infinity();
    c.pass = true;
    c.worst_node = worst;
    c.diagnostic = true;
    conditions.push_back(std::move(c));
  }
};

struct Tolerances {
  double adjoint = 1e-4;
  double boundary = 1e-6;
  double condition5 = 1e-4;
  double stationarity = 1e-3;      // non-regular route
  double transversality = 1e-8;
  double z1_identity = 1e-6;
  double nontriviality_min = 0.1;
  double atom = 1e-6;              // weights below this count as absent
  double max_gap_rel = 1e-4;       // gap tolerance = max_gap_rel·(1+|p|∞)·M
  std::optional<double> active_tol;
  int samples = 200;
  int ascent_steps = 20;
  std::uint64_t seed = 0;
};

/// Contact band used for support checks of a penalty certificate: ψ ≥ −4 ln γ / γ.
inline double penalty_contact_band(double gamma) {
  return gamma > 1.0 ? 4.0 * std::log(gamma) / gamma : 1e-6;
}

namespace detail {

inline double max_norm(const std::vector<Vec>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, x.norm());
  return m;
}

inline Vec cost_grad_x(const ProblemSpec& pb, double t, const Vec& x, const Vec& u) {
  return pb.L ? pb.L->grad_x(t, x, u) : Vec::Zero(x.size());
}

inline Vec cost_grad_u(const ProblemSpec& pb, double t, const Vec& x, const Vec& u) {
  return pb.L ? pb.L->grad_u(t, x, u) : Vec::Zero(u.size());
}

inline double cost(const ProblemSpec& pb, double t, const Vec& x, const Vec& u) {
  return pb.L ? pb.L->eval(t, x, u) : 0.0;
}

/// Distance of y to the cone generated by the columns of G (nonnegative combinations), by
/// enumerating active sets. Intended for a handful of generators.
inline double cone_distance(const Vec& y, const Mat& G) {
  const int k = static_cast<int>(G.cols());
  if (k == 0) return y.norm();
  if (k > 12) throw InvalidArgumentError("cone_distance: too many generators");
  double best = y.norm();
  for (int mask = 1; mask < (1 << k); ++mask) {
    std::vector<int> cols;
    for (int i = 0; i < k; ++i)
      if (mask & (1 << i)) cols.push_back(i);
    Mat S(G.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) S.col(static_cast<Eigen::Index>(c)) = G.col(cols[c]);
    const Vec theta = S.completeOrthogonalDecomposition().solve(y);
    if (theta.minCoeff() < 0.0) continue;
    best = std::min(best, (y - S * theta).norm());
  }
  return best;
}

/// Distance of y to the normal cone of C0 at x0. Zero for the singleton initial set.
inline double initial_cone_distance(const ProblemSpec& pb, const Vec& x0, const Vec& y, double active_tol) {
  if (pb.c0.empty()) return 0.0;
  std::vector<Vec> gens;
  for (const auto& c : pb.c0)
    if (c.eval(x0) >= -active_tol) gens.push_back(c.grad(x0));
  Mat G(x0.size(), static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) G.col(static_cast<Eigen::Index>(i)) = gens[i];
  return cone_distance(y, G);
}

/// Pulls u back onto {h(x,·) ≤ 0} along ∇_u h. Returns false if it fails.
inline bool restore_mixed(const ProblemSpec& pb, const Vec& x, Vec& u) {
  for (int it = 0; it < 30; ++it) {
    const double hv = pb.h.eval(x, u);
    if (hv <= 0.0) return true;
    const Vec gu = pb.h.grad_u(x, u);
    const double n2 = gu.squaredNorm();
    if (!(n2 > 1e-300)) return false;
    u -= (hv / n2 + 1e-14) * gu;
  }
  return pb.h.eval(x, u) <= 0.0;
}

/// max over sampled u ∈ Ω(x_h) of H(u) − H(u_ref), H(u) = ⟨p, f(x_f, u)⟩ − λ0 L(t, x_h, u).
inline double maximum_gap(const ProblemSpec& pb, const Vec& p, double lambda0, double t, const Vec& x_f,
                          const Vec& x_h, const Vec& u_ref, double box, int samples, int steps,
                          std::mt19937_64& rng) {
  const auto H = [&](const Vec& u) { return p.dot(pb.f.eval(x_f, u)) - lambda0 * cost(pb, t, x_h, u); };
  const auto dH = [&](const Vec& u) -> Vec {
    return pb.f.jac_u(x_f, u).transpose() * p - lambda0 * cost_grad_u(pb, t, x_h, u);
  };
  const double current = H(u_ref);
  std::uniform_real_distribution<double> d(-box, box);
  double best = -std::numeric_limits<double>::infinity();
  Vec best_u = u_ref;
  for (int s = 0; s < samples; ++s) {
    Vec u(u_ref.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = d(rng);
    if (pb.h.eval(x_h, u) > 0.0) continue;
    const double v = H(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  if (!std::isfinite(best)) {
    best = current;
    best_u = u_ref;
  }
  double step = 0.1 * box;
  for (int k = 0; k < steps; ++k) {
    const Vec g = dH(best_u);
    if (!(g.norm() > 0.0)) break;
    Vec trial = best_u + step * g / g.norm();
    if (restore_mixed(pb, x_h, trial) && trial.cwiseAbs().maxCoeff() <= box) {
      const double v = H(trial);
      if (v > best) {
        best = v;
        best_u = trial;
        continue;
      }
    }
    step *= 0.5;
  }
  return std::max(0.0, best - current);
}

inline void require_converged(const SolveResult& res) {
  if (res.status != SolveStatus::converged)
    throw NotConvergedError(std::string("certificate extraction needs a converged solve, got ") + to_string(res.status));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Regular case

/// Discrete multipliers from a converged penalty-route solve. λ0 = 1 before normalization;
/// (λ0, p, ν) are divided by λ0 + max_j|p_j|, while ξ and η stay the physical penalty coefficients.
inline RegularCertificate extract_regular(const ProblemSpec& pb, const TranscriptionConfig& cfg, const NlpProblem& nlp,
                                          const SolveResult& res, double gamma) {
  detail::require_converged(res);
  if (!nlp.layout || nlp.layout->has_slack) throw InvalidArgumentError("extract_regular needs a penalty-mode program");
  const auto& L = *nlp.layout;
  const int N = L.N, n = L.n;
  const double dt = 1.0 / N;
  const auto tr = extract_trajectory(nlp, res.z_star);
  RegularCertificate c;
  c.scheme = AdjointScheme::implicit_euler;
  c.gamma = gamma;
  c.lambda0 = 1.0;
  for (int j = 0; j < N; ++j) c.p.push_back(res.mu_eq.segment(nlp.rows.dynamics + j * n, n));
  // Node N closes the recursion: p_N = p_{N−1} − Δt p_{N−1} D_xF_γ(x_N, u_{N−1}).
  const Mat DF = penalty_field_jacobian(pb, gamma, tr.states[N], tr.controls[N - 1]);
  c.p.push_back(c.p[N - 1] - dt * DF.transpose() * c.p[N - 1]);
  for (int j = 0; j < N; ++j) c.nu.push_back(res.mu_ineq[nlp.rows.mixed + j] / dt);
  for (int j = 0; j <= N; ++j) {
    const double psi = pb.psi.eval(tr.states[j]);
    const double e = gamma * psi < 700.0 ? std::exp(gamma * psi) : std::numeric_limits<double>::infinity();
    c.xi.push_back(gamma * e);
    c.eta.push_back(dt * gamma * gamma * e);
  }
  const double s = c.lambda0 + detail::max_norm(c.p);
  if (!(s > 1e-14)) throw InvalidArgumentError("degenerate normalization: all multipliers vanish");
  c.scale = s;
  c.lambda0 /= s;
  for (auto& v : c.p) v /= s;
  for (auto& v : c.nu) v /= s;
  for (int j = 0; j <= N; ++j) c.eta_signed.push_back(c.eta[j] * c.p[j].dot(pb.psi.grad(tr.states[j])));
  c.kappa_obs = 0.0;
  for (int j = 0; j < N; ++j) c.kappa_obs = std::max(c.kappa_obs, std::abs(c.nu[j]) / (c.lambda0 + c.p[j].norm()));
  return c;
}

/// Rescales (λ0, p, ν) so that λ0 + max_j|p_j| = 1.
inline RegularCertificate normalized(RegularCertificate c) {
  const double s = c.lambda0 + detail::max_norm(c.p);
  if (!(s > 0.0)) throw InvalidArgumentError("degenerate normalization: all multipliers vanish");
  c.lambda0 /= s;
  for (auto& v : c.p) v /= s;
  for (auto& v : c.nu) v /= s;
  for (auto& v : c.eta_signed) v /= s;
  c.scale *= s;
  c.kappa_obs = 0.0;
  for (std::size_t j = 0; j < c.nu.size(); ++j)
    c.kappa_obs = std::max(c.kappa_obs, std::abs(c.nu[j]) / (c.lambda0 + c.p[j].norm()));
  return c;
}

/// Per-interval adjoint residual vectors r_j, j = 0..N−1.
inline std::vector<Vec> adjoint_residuals(const ProblemSpec& pb, const StateTrajectory& tr, const RegularCertificate& c) {
  const int N = tr.grid.N;
  const double dt = tr.grid.dt();
  std::vector<Vec> r;
  for (int j = 0; j < N; ++j) {
    // k is the node whose coefficients enter; q is the costate they multiply.
    const bool impl = c.scheme == AdjointScheme::implicit_euler;
    const int k = impl ? j + 1 : j;
    const Vec& q = impl ? c.p[j] : c.p[j + 1];
    const Vec& xk = tr.states[k];
    const Vec& uf = tr.controls[j];
    const Vec gp = pb.psi.grad(xk);
    const Mat A = pb.f.jac_x(xk, uf) - c.xi[k] * pb.psi.hess(xk);
    Vec res = (c.p[j] - c.p[j + 1]) - dt * A.transpose() * q + gp * (gp.dot(q) * c.eta[k]);
    if (k < N) {
      const Vec& uk = tr.controls[k];
      res += dt * c.nu[k] * pb.h.grad_x(xk, uk) + dt * c.lambda0 * detail::cost_grad_x(pb, tr.grid.t(k), xk, uk);
    }
    r.push_back(std::move(res));
  }
  return r;
}

/// Checks the discrete maximum principle for a regular mixed constraint.
inline ResidualReport verify_regular(const ProblemSpec& pb, const StateTrajectory& tr, const RegularCertificate& cert_in,
                                     const Tolerances& tol = {}) {
  tr.validate();
  const int N = tr.grid.N;
  require_dim(static_cast<Eigen::Index>(cert_in.p.size()), N + 1, "certificate p");
  require_dim(static_cast<Eigen::Index>(cert_in.nu.size()), N, "certificate nu");
  require_dim(static_cast<Eigen::Index>(cert_in.xi.size()), N + 1, "certificate xi");
  require_dim(static_cast<Eigen::Index>(cert_in.eta.size()), N + 1, "certificate eta");
  require_dim(tr.state_dim(), pb.n(), "trajectory state");
  require_dim(tr.control_dim(), pb.m(), "trajectory control");
  for (const auto& v : cert_in.p) require_dim(v.size(), pb.n(), "certificate p_j");
  const RegularCertificate c = normalized(cert_in);
  const double dt = tr.grid.dt();
  const bool impl = c.scheme == AdjointScheme::implicit_euler;
  const double active = tol.active_tol.value_or(penalty_contact_band(c.gamma));
  ResidualReport rep;
  rep.kind = "regular";

  // (1) nontriviality
  double eta_sum = 0.0;
  for (double e : c.eta) eta_sum += e;
  rep.add("nontriviality", c.lambda0 + detail::max_norm(c.p) + eta_sum, tol.nontriviality_min, -1, false);

  // (2) adjoint
  const auto r = adjoint_residuals(pb, tr, c);
  double rmax = 0.0, rsum = 0.0;
  int rworst = -1;
  for (int j = 0; j < N; ++j) {
    const double v = r[j].norm();
    rsum += v;
    if (v > rmax) {
      rmax = v;
      rworst = j;
    }
  }
  rep.add("adjoint", rmax, tol.adjoint, rworst);
  rep.add_diagnostic("adjoint_l1", rsum, rworst);

  // (3) boundary
  rep.add("boundary_terminal", (c.p[N] + c.lambda0 * pb.g.grad(tr.states[N])).norm(), tol.boundary, N);
  Vec y0 = c.p[0];
  if (impl) {
    y0 -= dt * c.nu[0] * pb.h.grad_x(tr.states[0], tr.controls[0]) +
          dt * c.lambda0 * detail::cost_grad_x(pb, 0.0, tr.states[0], tr.controls[0]);
  }
  rep.add("boundary_initial", detail::initial_cone_distance(pb, tr.states[0], y0, 1e-6), tol.boundary, 0);

  // (4) maximum condition
  double umax = 0.0;
  for (const auto& u : tr.controls) umax = std::max(umax, u.cwiseAbs().maxCoeff());
  const double box = 2.0 * (1.0 + umax);
  std::mt19937_64 rng(tol.seed);
  double gap = 0.0, M_obs = 1.0, pmax = 0.0;
  int gworst = -1;
  for (int j = 0; j < N; ++j) {
    const Vec& xf = impl ? tr.states[j + 1] : tr.states[j];
    const Vec& q = impl ? c.p[j] : c.p[j + 1];
    M_obs = std::max(M_obs, pb.f.eval(xf, tr.controls[j]).norm());
    pmax = std::max(pmax, q.cwiseAbs().maxCoeff());
    const double g = detail::maximum_gap(pb, q, c.lambda0, tr.grid.t(j), xf, tr.states[j], tr.controls[j], box,
                                         tol.samples, tol.ascent_steps, rng);
    if (g > gap) {
      gap = g;
      gworst = j;
    }
  }
  rep.add("maximum", gap, tol.max_gap_rel * (1.0 + pmax) * M_obs, gworst);

  // (5) ν∇_u h = p D_u f − λ0 L_u
  double c5 = 0.0;
  int c5w = -1;
  for (int j = 0; j < N; ++j) {
    const Vec& xf = impl ? tr.states[j + 1] : tr.states[j];
    const Vec& q = impl ? c.p[j] : c.p[j + 1];
    const Vec& u = tr.controls[j];
    const Vec res = c.nu[j] * pb.h.grad_u(tr.states[j], u) - pb.f.jac_u(xf, u).transpose() * q +
                    c.lambda0 * detail::cost_grad_u(pb, tr.grid.t(j), tr.states[j], u);
    if (res.norm() > c5) {
      c5 = res.norm();
      c5w = j;
    }
  }
  rep.add("condition5", c5, tol.condition5, c5w);

  // (6) observed κ
  ConditionResult k6;
  k6.id = "kappa";
  k6.residual = c.kappa_obs;
  k6.tolerance = std::numeric_limits<double>::infinity();
  k6.pass = std::isfinite(c.kappa_obs);
  rep.conditions.push_back(k6);

  // Support of ξ, η on the contact band and sign of ν.
  int bad_eta = 0, bad_xi = 0, eta_w = -1, xi_w = -1;
  for (int j = 0; j <= N; ++j) {
    const bool band = pb.psi.eval(tr.states[j]) >= -active;
    if (!band && c.eta[j] > tol.atom) {
      ++bad_eta;
      eta_w = j;
    }
    if (!band && c.xi[j] > tol.atom) {
      ++bad_xi;
      xi_w = j;
    }
  }
  rep.add("support_eta", bad_eta, 0.0, eta_w);
  rep.add("support_xi", bad_xi, 0.0, xi_w);
  double nu_neg = 0.0;
  int nu_w = -1;
  for (int j = 0; j < N; ++j)
    if (-c.nu[j] > nu_neg) {
      nu_neg = -c.nu[j];
      nu_w = j;
    }
  rep.add("nu_nonnegative", nu_neg, 1e-12, nu_w);
  double signed_sum = 0.0;
  for (double e : c.eta_signed) signed_sum += e;
  rep.add_diagnostic("eta_signed_sum", signed_sum, -1);
  rep.notes.push_back("normalization: lambda0 + max|p| = 1; xi and eta are the penalty coefficients");
  return rep;
}

// ---------------------------------------------------------------------------
// Non-regular case

namespace detail {

inline double neighbor_median(const std::vector<double>& v, int j, int last) {
  std::vector<double> nb;
  for (int k = j - 2; k <= j + 2; ++k)
    if (k != j && k >= 0 && k <= last) nb.push_back(v[static_cast<std::size_t>(k)]);
  if (nb.empty()) return 0.0;
  std::sort(nb.begin(), nb.end());
  const std::size_t h = nb.size() / 2;
  return nb.size() % 2 ? nb[h] : 0.5 * (nb[h - 1] + nb[h]);
}

/// Raw multiplier values (not densities) classified as spikes: > 10× the neighbor median and above floor.
inline std::vector<bool> spikes(const std::vector<double>& raw, int last, double floor) {
  std::vector<bool> s(raw.size(), false);
  for (int j = 0; j <= last; ++j) {
    const double v = raw[static_cast<std::size_t>(j)];
    s[static_cast<std::size_t>(j)] = v > floor && v > 10.0 * neighbor_median(raw, j, last);
  }
  return s;
}

}  // namespace detail

/// Discrete multipliers from a converged complementarity-route solve at the final ε stage.
inline NonRegularCertificate extract_nonregular(const ProblemSpec& pb, const TranscriptionConfig& cfg,
                                                const NlpProblem& nlp, const SolveResult& res,
                                                double final_epsilon = 1e-6) {
  detail::require_converged(res);
  if (!nlp.layout || !nlp.layout->has_slack)
    throw InvalidArgumentError("extract_nonregular needs a complementarity-mode program");
  if (cfg.epsilon > final_epsilon * (1.0 + 1e-12))
    throw InvalidArgumentError("extract_nonregular: relaxation schedule not complete (epsilon " +
                               std::to_string(cfg.epsilon) + ")");
  const auto& L = *nlp.layout;
  const int N = L.N, n = L.n;
  const double dt = 1.0 / N;
  const auto tr = extract_trajectory(nlp, res.z_star);
  const auto& R = nlp.rows;
  const auto mu = [&](int row) { return res.mu_ineq[row]; };

  std::vector<double> a(N + 1), b(N + 1, 0.0), cc(N + 1, 0.0), d(N + 1, 0.0), e(N + 1, 0.0);
  for (int j = 0; j <= N; ++j) a[j] = mu(R.psi + j);
  for (int j = 0; j < N; ++j) {
    b[j] = mu(R.mixed + j);
    cc[j] = mu(R.nonneg + j);
    d[j] = mu(R.comp + j);
    e[j] = mu(R.cap + j);
  }
  double amax = 0.0;
  for (int j = 0; j <= N; ++j) amax = std::max({amax, a[j], b[j], d[j]});
  const double floor = std::max(1e-10, 1e-6 * amax);
  const double hu_tol = 1e-6;

  NonRegularCertificate c;
  c.lambda0 = 1.0;
  c.epsilon = cfg.epsilon;
  c.z1.assign(N + 1, 0.0);
  c.z2.assign(N + 1, 0.0);
  c.z3.assign(N + 1, 0.0);
  c.w.assign(N + 1, 0.0);
  c.zeta1.assign(N + 1, 0.0);
  c.zeta2.assign(N + 1, 0.0);
  c.zeta3.assign(N + 1, 0.0);
  c.varpi.assign(N + 1, 0.0);
  c.cap.assign(N + 1, 0.0);

  const auto sa = detail::spikes(a, N, floor);
  const auto sb = detail::spikes(b, N - 1, floor);
  const auto sd = detail::spikes(d, N - 1, floor);
  for (int j = 0; j <= N; ++j) {
    if (sa[j]) c.zeta2[j] = a[j];
    else c.z2[j] = a[j] / dt;
  }
  for (int j = 0; j < N; ++j) {
    const Vec& x = tr.states[j];
    const Vec& u = tr.controls[j];
    const bool flat = pb.h.grad_u(x, u).norm() <= hu_tol;
    if (sb[j] && flat) c.zeta3[j] = b[j];
    else c.z3[j] = b[j] / dt;
    const double psi = pb.psi.eval(x);
    if (sd[j]) {
      c.varpi[j] = -d[j];
      c.zeta1[j] = psi * c.varpi[j];
    } else {
      c.w[j] = -d[j] / dt;
    }
    c.z1[j] = (cc[j] - c.zeta1[j]) / dt;
    c.cap[j] = e[j] / dt;
  }

  // λ_j = −μ_j on intervals; λ_N closes x_N-stationarity and should vanish.
  for (int j = 0; j < N; ++j) c.lambda.push_back(-res.mu_eq.segment(R.dynamics + j * n, n));
  c.lambda.push_back(c.lambda[N - 1] - a[N] * pb.psi.grad(tr.states[N]) - pb.g.grad(tr.states[N]));
  // The terminal ψ multiplier and the Mayer gradient form the terminal jump; keep a[N] as an atom.
  c.z2[N] = 0.0;
  c.zeta2[N] = a[N];

  // Normalize by the nontriviality sum.
  double s = c.lambda0;
  for (int j = 0; j <= N; ++j)
    s += dt * (c.z2[j] + c.z3[j] + std::abs(c.w[j])) + c.zeta2[j] + c.zeta3[j] + std::abs(c.varpi[j]);
  if (!(s > 1e-14)) throw InvalidArgumentError("degenerate normalization: all multipliers vanish");
  c.scale = s;
  c.lambda0 /= s;
  for (auto* v : {&c.z1, &c.z2, &c.z3, &c.w, &c.zeta1, &c.zeta2, &c.zeta3, &c.varpi, &c.cap})
    for (auto& x : *v) x /= s;
  for (auto& v : c.lambda) v /= s;

  // α by the tail formula over atomic Θ; α_0 uses the closed interval [0, 1].
  std::vector<Vec> theta;
  for (int j = 0; j <= N; ++j) {
    const Vec& x = tr.states[j];
    const Vec gp = pb.psi.grad(x);
    Vec th = c.zeta2[j] * gp;
    if (j < N) {
      th += c.zeta3[j] * pb.h.grad_x(x, tr.controls[j]) + (*tr.slacks)[j] * c.varpi[j] * gp;
    }
    theta.push_back(th);
  }
  c.alpha.assign(N + 1, Vec::Zero(n));
  for (int j = N - 1; j >= 0; --j) c.alpha[j] = c.alpha[j + 1] - theta[j + 1];
  c.alpha[0] -= theta[0];
  for (int j = 0; j <= N; ++j) c.p.push_back(c.lambda[j] + c.alpha[j]);
  return c;
}

/// Checks the discrete non-regular maximum principle.
inline ResidualReport verify_nonregular(const ProblemSpec& pb, const StateTrajectory& tr,
                                        const NonRegularCertificate& c, const Tolerances& tol = {}) {
  tr.validate();
  const int N = tr.grid.N;
  if (!tr.slacks) throw InvalidArgumentError("verify_nonregular needs a trajectory with slacks");
  for (const auto* v : {&c.z1, &c.z2, &c.z3, &c.w, &c.zeta1, &c.zeta2, &c.zeta3, &c.varpi})
    require_dim(static_cast<Eigen::Index>(v->size()), N + 1, "certificate node values");
  require_dim(static_cast<Eigen::Index>(c.lambda.size()), N + 1, "certificate lambda");
  require_dim(static_cast<Eigen::Index>(c.alpha.size()), N + 1, "certificate alpha");
  require_dim(tr.state_dim(), pb.n(), "trajectory state");
  const double dt = tr.grid.dt();
  const auto& v = *tr.slacks;
  const double active = tol.active_tol.value_or(std::max(1e-6, 10.0 * c.epsilon));
  ResidualReport rep;
  rep.kind = "nonregular";
  rep.notes.push_back("hypothesis not verified: closed image of the constraint linearization");
  const auto cap = c.cap.size() == static_cast<std::size_t>(N + 1) ? c.cap : std::vector<double>(N + 1, 0.0);

  // (a) nontriviality, z1 and ζ1 excluded
  double nt = c.lambda0;
  for (int j = 0; j <= N; ++j)
    nt += dt * (c.z2[j] + c.z3[j] + std::abs(c.w[j])) + c.zeta2[j] + c.zeta3[j] + std::abs(c.varpi[j]);
  rep.add("a_nontriviality", nt, 0.0, -1, false);

  // (b) complementarity of densities and placement of atoms
  double comp = 0.0;
  int comp_w = -1;
  int misplaced = 0, mis_w = -1;
  double neg = 0.0;
  for (int j = 0; j <= N; ++j) {
    const Vec& x = tr.states[j];
    const double psi = pb.psi.eval(x);
    double cj = std::abs(c.z2[j] * psi);
    neg = std::max({neg, -c.z2[j], -c.zeta2[j]});
    if (c.zeta2[j] > tol.atom && std::abs(psi) > active) {
      ++misplaced;
      mis_w = j;
    }
    if (j < N) {
      const double hv = pb.h.eval(x, tr.controls[j]);
      cj = std::max({cj, std::abs(c.z1[j] * v[j]), std::abs(c.z3[j] * hv)});
      neg = std::max({neg, -c.z1[j], -c.z3[j], -c.zeta1[j], -c.zeta3[j]});
      if ((c.zeta3[j] > tol.atom && std::abs(hv) > active) || (c.zeta1[j] > tol.atom && std::abs(v[j]) > active)) {
        ++misplaced;
        mis_w = j;
      }
    }
    if (cj > comp) {
      comp = cj;
      comp_w = j;
    }
  }
  rep.add("b_complementarity", comp, tol.stationarity, comp_w);
  rep.add("b_atom_placement", misplaced, 0.0, mis_w);
  rep.add("b_sign", std::max(0.0, neg), 1e-9, -1);

  // (c) transversality and costate equation with p = λ + α (open tails inside the grid)
  rep.add("c_transversality", c.lambda[N].norm(), tol.transversality, N);
  std::vector<Vec> tail(N + 1, Vec::Zero(pb.n()));
  for (int j = N - 1; j >= 0; --j) {
    const Vec gp = pb.psi.grad(tr.states[j + 1]);
    Vec th = c.zeta2[j + 1] * gp;
    if (j + 1 < N) th += c.zeta3[j + 1] * pb.h.grad_x(tr.states[j + 1], tr.controls[j + 1]) + v[j + 1] * c.varpi[j + 1] * gp;
    tail[j] = tail[j + 1] - th;
  }
  double cost_res = 0.0;
  int cost_w = -1;
  for (int k = 1; k < N; ++k) {
    const Vec& x = tr.states[k];
    const Vec& u = tr.controls[k];
    const Vec gp = pb.psi.grad(x);
    const Mat A = pb.f.jac_x(x, u) - v[k] * pb.psi.hess(x);
    const Vec pkm = c.lambda[k - 1] + tail[k - 1];
    const Vec pk = c.lambda[k] + tail[k];
    const Vec r = (pkm - pk) - dt * A.transpose() * (pk - tail[k]) -
                  dt * (c.lambda0 * detail::cost_grad_x(pb, tr.grid.t(k), x, u) + (c.z2[k] + c.w[k] * v[k]) * gp +
                        c.z3[k] * pb.h.grad_x(x, u)) -
                  2.0 * dt * cap[k] * v[k] * v[k] * (pb.psi.hess(x) * gp);
    if (r.norm() > cost_res) {
      cost_res = r.norm();
      cost_w = k;
    }
  }
  rep.add("c_costate", cost_res, tol.stationarity, cost_w);

  // (d) stationarity in (u, v)
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0, z1id = 0, capmax = 0;
  int w1 = -1, w2 = -1, w3 = -1, w4 = -1, wz = -1, wc = -1;
  for (int j = 0; j < N; ++j) {
    const Vec& x = tr.states[j];
    const Vec& u = tr.controls[j];
    const Vec gp = pb.psi.grad(x);
    const double psi = pb.psi.eval(x);
    const Vec hu = pb.h.grad_u(x, u);
    const double r1 = (pb.f.jac_u(x, u).transpose() * c.lambda[j] +
                       c.lambda0 * detail::cost_grad_u(pb, tr.grid.t(j), x, u) + c.z3[j] * hu)
                          .norm();
    const double r2 = std::abs(-c.lambda[j].dot(gp) - c.z1[j] + c.w[j] * psi);
    const double r3 = (hu * c.zeta3[j]).norm();
    const double r4 = std::abs(-c.zeta1[j] + psi * c.varpi[j]);
    const double capterm = 2.0 * cap[j] * v[j] * gp.squaredNorm();
    const double rz = std::abs(c.z1[j] - (-c.lambda[j].dot(gp) + c.w[j] * psi + capterm));
    if (r1 > s1) { s1 = r1; w1 = j; }
    if (r2 > s2) { s2 = r2; w2 = j; }
    if (r3 > s3) { s3 = r3; w3 = j; }
    if (r4 > s4) { s4 = r4; w4 = j; }
    if (rz > z1id) { z1id = rz; wz = j; }
    if (cap[j] > capmax) { capmax = cap[j]; wc = j; }
  }
  rep.add("d_s1", s1, tol.stationarity, w1);
  rep.add("d_s2", s2, tol.stationarity, w2);
  rep.add("d_s3", s3, tol.stationarity, w3);
  rep.add("d_s4", s4, tol.stationarity, w4);
  rep.add("z1_identity", z1id, tol.z1_identity, wz);
  rep.conditions.back().diagnostic = true;  // restates (s2) with the truncation term; judged by callers
  rep.add_diagnostic("rho_cap_multiplier", capmax, wc);
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vec json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline double at_or_zero(const std::vector<double>& v, std::size_t j) { return j < v.size() ? v[j] : 0.0; }

}  // namespace detail

inline nlohmann::json to_json(const RegularCertificate& c) {
  nlohmann::json j;
  j["kind"] = "regular";
  j["scheme"] = to_string(c.scheme);
  j["gamma"] = c.gamma;
  j["lambda0"] = c.lambda0;
  j["kappa_obs"] = c.kappa_obs;
  j["scale"] = c.scale;
  j["nodes"] = nlohmann::json::array();
  for (std::size_t k = 0; k < c.p.size(); ++k) {
    nlohmann::json nj;
    nj["j"] = k;
    nj["p"] = detail::vec_json(c.p[k]);
    if (k < c.nu.size()) nj["nu"] = c.nu[k];
    nj["xi"] = detail::at_or_zero(c.xi, k);
    nj["eta"] = detail::at_or_zero(c.eta, k);
    nj["eta_signed"] = detail::at_or_zero(c.eta_signed, k);
    j["nodes"].push_back(nj);
  }
  return j;
}

inline RegularCertificate regular_from_json(const nlohmann::json& j) {
  RegularCertificate c;
  c.scheme = j.at("scheme").get<std::string>() == "implicit_euler" ? AdjointScheme::implicit_euler
                                                                   : AdjointScheme::explicit_euler;
  c.gamma = j.at("gamma");
  c.lambda0 = j.at("lambda0");
  c.kappa_obs = j.at("kappa_obs");
  c.scale = j.at("scale");
  for (const auto& nj : j.at("nodes")) {
    c.p.push_back(detail::json_vec(nj.at("p")));
    if (nj.contains("nu")) c.nu.push_back(nj.at("nu"));
    c.xi.push_back(nj.at("xi"));
    c.eta.push_back(nj.at("eta"));
    c.eta_signed.push_back(nj.at("eta_signed"));
  }
  return c;
}

inline nlohmann::json to_json(const NonRegularCertificate& c) {
  nlohmann::json j;
  j["kind"] = "nonregular";
  j["lambda0"] = c.lambda0;
  j["epsilon"] = c.epsilon;
  j["scale"] = c.scale;
  j["nodes"] = nlohmann::json::array();
  for (std::size_t k = 0; k < c.lambda.size(); ++k) {
    nlohmann::json nj;
    nj["j"] = k;
    nj["lambda"] = detail::vec_json(c.lambda[k]);
    nj["alpha"] = detail::vec_json(c.alpha[k]);
    nj["p"] = detail::vec_json(c.p[k]);
    nj["z1"] = c.z1[k];
    nj["z2"] = c.z2[k];
    nj["z3"] = c.z3[k];
    nj["w"] = c.w[k];
    nj["zeta1"] = c.zeta1[k];
    nj["zeta2"] = c.zeta2[k];
    nj["zeta3"] = c.zeta3[k];
    nj["varpi"] = c.varpi[k];
    nj["cap"] = detail::at_or_zero(c.cap, k);
    j["nodes"].push_back(nj);
  }
  return j;
}

inline NonRegularCertificate nonregular_from_json(const nlohmann::json& j) {
  NonRegularCertificate c;
  c.lambda0 = j.at("lambda0");
  c.epsilon = j.at("epsilon");
  c.scale = j.at("scale");
  for (const auto& nj : j.at("nodes")) {
    c.lambda.push_back(detail::json_vec(nj.at("lambda")));
    c.alpha.push_back(detail::json_vec(nj.at("alpha")));
    c.p.push_back(detail::json_vec(nj.at("p")));
    c.z1.push_back(nj.at("z1"));
    c.z2.push_back(nj.at("z2"));
    c.z3.push_back(nj.at("z3"));
    c.w.push_back(nj.at("w"));
    c.zeta1.push_back(nj.at("zeta1"));
    c.zeta2.push_back(nj.at("zeta2"));
    c.zeta3.push_back(nj.at("zeta3"));
    c.varpi.push_back(nj.at("varpi"));
    c.cap.push_back(nj.at("cap"));
  }
  return c;
}

inline nlohmann::json to_json(const ResidualReport& r) {
  nlohmann::json j;
  j["kind"] = r.kind;
  j["pass"] = r.passed();
  j["notes"] = r.notes;
  j["conditions"] = nlohmann::json::array();
  for (const auto& c : r.conditions) {
    nlohmann::json cj;
    cj["condition_id"] = c.id;
    cj["residual"] = c.residual;
    cj["tolerance"] = std::isfinite(c.tolerance) ? nlohmann::json(c.tolerance) : nlohmann::json(nullptr);
    cj["pass"] = c.pass;
    cj["worst_node"] = c.worst_node;
    cj["diagnostic"] = c.diagnostic;
    j["conditions"].push_back(cj);
  }
  return j;
}

inline ResidualReport report_from_json(const nlohmann::json& j) {
  ResidualReport r;
  r.kind = j.at("kind");
  r.notes = j.at("notes").get<std::vector<std::string>>();
  for (const auto& cj : j.at("conditions")) {
    ConditionResult c;
    c.id = cj.at("condition_id");
    c.residual = cj.at("residual");
    c.tolerance = cj.at("tolerance").is_null() ? std::numeric_limits<double>::infinity() : cj.at("tolerance").get<double>();
    c.pass = cj.at("pass");
    c.worst_node = cj.at("worst_node");
    c.diagnostic = cj.at("diagnostic");
    r.conditions.push_back(c);
  }
  return r;
}

}  // namespace sweep
