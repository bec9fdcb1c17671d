#pragma once

#include "sweep/model.hpp"
#include "sweep/nlp.hpp"
#include "sweep/sweep_sim.hpp"
#include "sweep/trajectory.hpp"

#include <json.hpp>

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sweep {

enum class TranscriptionMode { penalty, complementarity };

inline const char* to_string(TranscriptionMode m) {
  return m == TranscriptionMode::penalty ? "penalty" : "complementarity";
}

struct TranscriptionConfig {
  int N = 100;
  TranscriptionMode mode = TranscriptionMode::penalty;
  double gamma = 100.0;               // penalty mode
  double delta = 0.0;                 // mixed-constraint relaxation, penalty mode
  double epsilon = 1e-2;              // complementarity relaxation
  std::optional<double> rho;          // truncation bound; defaults to the problem's ρ

  double rho_or(const ProblemSpec& p) const { return rho.value_or(p.rho); }

  void validate() const {
    if (N < 2) throw InvalidArgumentError("transcription needs N ≥ 2");
    if (mode == TranscriptionMode::penalty && !(gamma > 0.0)) throw InvalidArgumentError("penalty mode needs gamma > 0");
    if (!(epsilon >= 0.0)) throw InvalidArgumentError("complementarity relaxation must be ≥ 0");
    if (rho && !(*rho > 0.0)) throw InvalidArgumentError("rho must be positive");
  }
};

namespace detail {

inline std::vector<int> span(int start, int count) {
  std::vector<int> v(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) v[static_cast<std::size_t>(k)] = start + k;
  return v;
}

inline std::vector<int> concat(std::initializer_list<std::vector<int>> parts) {
  std::vector<int> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline void add_objective_terms(BlockNlpBuilder& b, const ProblemSpec& p, const VariableLayout& L) {
  const int n = L.n, m = L.m;
  b.add_objective({span(L.x(L.N), n), 1,
                   [p](const Vec& y) { return Vec::Constant(1, p.g.eval(y)); },
                   [p](const Vec& y) -> Mat { return p.g.grad(y).transpose(); }});
  if (!p.L) return;
  const double dt = 1.0 / L.N;
  for (int j = 0; j < L.N; ++j) {
    const double t = static_cast<double>(j) / L.N;
    b.add_objective({concat({span(L.x(j), n), span(L.u(j), m)}), 1,
                     [p, t, dt, n, m](const Vec& y) {
                       return Vec::Constant(1, dt * p.L->eval(t, y.head(n), y.tail(m)));
                     },
                     [p, t, dt, n, m](const Vec& y) -> Mat {
                       Mat J(1, n + m);
                       J.leftCols(n) = dt * p.L->grad_x(t, y.head(n), y.tail(m)).transpose();
                       J.rightCols(m) = dt * p.L->grad_u(t, y.head(n), y.tail(m)).transpose();
                       return J;
                     }});
  }
}

inline Block mixed_block(const ProblemSpec& p, const VariableLayout& L, int j, double delta) {
  const int n = L.n, m = L.m;
  return {concat({span(L.x(j), n), span(L.u(j), m)}), 1,
          [p, n, m, delta](const Vec& y) { return Vec::Constant(1, p.h.eval(y.head(n), y.tail(m)) - delta); },
          [p, n, m](const Vec& y) -> Mat {
            Mat J(1, n + m);
            J.leftCols(n) = p.h.grad_x(y.head(n), y.tail(m)).transpose();
            J.rightCols(m) = p.h.grad_u(y.head(n), y.tail(m)).transpose();
            return J;
          }};
}

/// Initial-set rows c0ᵢ(x_0) ≤ 0, or a pinned x_0 through variable bounds for the singleton set.
inline void add_initial_set(BlockNlpBuilder& b, const ProblemSpec& p, const VariableLayout& L, ConstraintLayout& rows) {
  if (p.c0.empty()) return;
  rows.c0 = b.ineq_rows();
  rows.c0_count = static_cast<int>(p.c0.size());
  for (const auto& c : p.c0)
    b.add_ineq({span(L.x(0), L.n), 1, [c](const Vec& y) { return Vec::Constant(1, c.eval(y)); },
                [c](const Vec& y) -> Mat { return c.grad(y).transpose(); }});
}

inline void pin_initial_state(NlpProblem& nlp, const ProblemSpec& p, const VariableLayout& L) {
  if (!p.c0.empty()) return;
  const double inf = std::numeric_limits<double>::infinity();
  nlp.lower = Vec::Constant(nlp.n_vars, -inf);
  nlp.upper = Vec::Constant(nlp.n_vars, inf);
  nlp.lower.segment(L.x(0), L.n) = p.x0;
  nlp.upper.segment(L.x(0), L.n) = p.x0;
}

inline void check_problem(const ProblemSpec& p) {
  p.validate();
  if (p.x0.size() != p.n()) throw DimensionMismatchError(p.name + ": x0 dimension differs from the state dimension");
}

}  // namespace detail

/// Implicit-Euler transcription of the penalized dynamics x' = f(x,u) − γe^{γψ(x)}∇ψ(x).
inline NlpProblem transcribe_penalty(const ProblemSpec& p, const TranscriptionConfig& cfg) {
  cfg.validate();
  if (cfg.mode != TranscriptionMode::penalty) throw InvalidArgumentError("transcribe_penalty requires penalty mode");
  detail::check_problem(p);
  using detail::concat;
  using detail::span;
  const VariableLayout L{cfg.N, p.n(), p.m(), false};
  const int n = L.n, m = L.m;
  const double dt = 1.0 / cfg.N, gamma = cfg.gamma;
  BlockNlpBuilder b(L.size());
  ConstraintLayout rows;
  detail::add_objective_terms(b, p, L);

  rows.dynamics = 0;
  for (int j = 0; j < cfg.N; ++j) {
    b.add_eq({concat({span(L.x(j), n), span(L.x(j + 1), n), span(L.u(j), m)}), n,
              [p, n, m, dt, gamma](const Vec& y) -> Vec {
                const Vec xj = y.head(n), x1 = y.segment(n, n), u = y.tail(m);
                return x1 - xj - dt * penalty_field(p, gamma, x1, u);
              },
              [p, n, m, dt, gamma](const Vec& y) -> Mat {
                const Vec x1 = y.segment(n, n), u = y.tail(m);
                Mat J(n, 2 * n + m);
                J.leftCols(n) = -Mat::Identity(n, n);
                J.middleCols(n, n) = Mat::Identity(n, n) - dt * penalty_field_jacobian(p, gamma, x1, u);
                J.rightCols(m) = -dt * p.f.jac_u(x1, u);
                return J;
              }});
  }
  rows.mixed = b.ineq_rows();
  for (int j = 0; j < cfg.N; ++j) b.add_ineq(detail::mixed_block(p, L, j, cfg.delta));
  detail::add_initial_set(b, p, L, rows);

  NlpProblem nlp = b.build();
  nlp.layout = L;
  nlp.rows = rows;
  detail::pin_initial_state(nlp, p, L);
  return nlp;
}

/// Explicit-Euler transcription with the slack v: x' = f(x,u) − v∇ψ(x), v ≥ 0, −vψ ≤ ε, |v∇ψ|² ≤ ρ².
inline NlpProblem transcribe_complementarity(const ProblemSpec& p, const TranscriptionConfig& cfg) {
  cfg.validate();
  if (cfg.mode != TranscriptionMode::complementarity)
    throw InvalidArgumentError("transcribe_complementarity requires complementarity mode");
  detail::check_problem(p);
  using detail::concat;
  using detail::span;
  const VariableLayout L{cfg.N, p.n(), p.m(), true};
  const int n = L.n, m = L.m;
  const double dt = 1.0 / cfg.N, eps = cfg.epsilon, rho = cfg.rho_or(p);
  BlockNlpBuilder b(L.size());
  ConstraintLayout rows;
  detail::add_objective_terms(b, p, L);

  rows.dynamics = 0;
  for (int j = 0; j < cfg.N; ++j) {
    b.add_eq({concat({span(L.x(j), n), span(L.x(j + 1), n), span(L.u(j), m), {L.v(j)}}), n,
              [p, n, m, dt](const Vec& y) -> Vec {
                const Vec xj = y.head(n), x1 = y.segment(n, n), u = y.segment(2 * n, m);
                const double v = y[2 * n + m];
                return x1 - xj - dt * (p.f.eval(xj, u) - v * p.psi.grad(xj));
              },
              [p, n, m, dt](const Vec& y) -> Mat {
                const Vec xj = y.head(n), u = y.segment(2 * n, m);
                const double v = y[2 * n + m];
                Mat J(n, 2 * n + m + 1);
                J.leftCols(n) = -Mat::Identity(n, n) - dt * (p.f.jac_x(xj, u) - v * p.psi.hess(xj));
                J.middleCols(n, n) = Mat::Identity(n, n);
                J.middleCols(2 * n, m) = -dt * p.f.jac_u(xj, u);
                J.col(2 * n + m) = dt * p.psi.grad(xj);
                return J;
              }});
  }
  rows.psi = b.ineq_rows();
  for (int j = 0; j <= cfg.N; ++j)
    b.add_ineq({span(L.x(j), n), 1, [p](const Vec& y) { return Vec::Constant(1, p.psi.eval(y)); },
                [p](const Vec& y) -> Mat { return p.psi.grad(y).transpose(); }});
  rows.mixed = b.ineq_rows();
  for (int j = 0; j < cfg.N; ++j) b.add_ineq(detail::mixed_block(p, L, j, 0.0));
  rows.nonneg = b.ineq_rows();
  for (int j = 0; j < cfg.N; ++j)
    b.add_ineq({{L.v(j)}, 1, [](const Vec& y) { return Vec::Constant(1, -y[0]); },
                [](const Vec&) -> Mat { return Mat::Constant(1, 1, -1.0); }});
  rows.comp = b.ineq_rows();
  for (int j = 0; j < cfg.N; ++j)
    b.add_ineq({concat({span(L.x(j), n), {L.v(j)}}), 1,
                [p, n, eps](const Vec& y) { return Vec::Constant(1, -y[n] * p.psi.eval(y.head(n)) - eps); },
                [p, n](const Vec& y) -> Mat {
                  Mat J(1, n + 1);
                  J.leftCols(n) = -y[n] * p.psi.grad(y.head(n)).transpose();
                  J(0, n) = -p.psi.eval(y.head(n));
                  return J;
                }});
  rows.cap = b.ineq_rows();
  for (int j = 0; j < cfg.N; ++j)
    b.add_ineq({concat({span(L.x(j), n), {L.v(j)}}), 1,
                [p, n, rho](const Vec& y) {
                  return Vec::Constant(1, y[n] * y[n] * p.psi.grad(y.head(n)).squaredNorm() - rho * rho);
                },
                [p, n](const Vec& y) -> Mat {
                  const Vec x = y.head(n), gp = p.psi.grad(x);
                  const double v = y[n];
                  Mat J(1, n + 1);
                  J.leftCols(n) = 2.0 * v * v * (p.psi.hess(x) * gp).transpose();
                  J(0, n) = 2.0 * v * gp.squaredNorm();
                  return J;
                }});
  detail::add_initial_set(b, p, L, rows);

  NlpProblem nlp = b.build();
  nlp.layout = L;
  nlp.rows = rows;
  detail::pin_initial_state(nlp, p, L);
  return nlp;
}

inline NlpProblem transcribe(const ProblemSpec& p, const TranscriptionConfig& cfg) {
  return cfg.mode == TranscriptionMode::penalty ? transcribe_penalty(p, cfg) : transcribe_complementarity(p, cfg);
}

/// Inverse of the layout map.
inline StateTrajectory extract_trajectory(const NlpProblem& nlp, const Vec& z) {
  if (!nlp.layout) throw InvalidArgumentError("program has no trajectory layout");
  const auto& L = *nlp.layout;
  require_dim(z.size(), L.size(), "extract_trajectory z");
  StateTrajectory tr{Grid(L.N), {}, {}, std::nullopt};
  for (int j = 0; j <= L.N; ++j) tr.states.push_back(z.segment(L.x(j), L.n));
  for (int j = 0; j < L.N; ++j) tr.controls.push_back(z.segment(L.u(j), L.m));
  if (L.has_slack) {
    std::vector<double> v;
    for (int j = 0; j < L.N; ++j) v.push_back(z[L.v(j)]);
    tr.slacks = std::move(v);
  }
  return tr;
}

/// Packs a trajectory into the flat decision vector. Missing slacks are written as zero.
inline Vec flatten(const VariableLayout& L, const StateTrajectory& tr) {
  tr.validate();
  require_dim(tr.grid.N, L.N, "flatten grid");
  Vec z = Vec::Zero(L.size());
  for (int j = 0; j <= L.N; ++j) {
    require_dim(tr.states[j].size(), L.n, "flatten state");
    z.segment(L.x(j), L.n) = tr.states[j];
  }
  for (int j = 0; j < L.N; ++j) {
    require_dim(tr.controls[j].size(), L.m, "flatten control");
    z.segment(L.u(j), L.m) = tr.controls[j];
  }
  if (L.has_slack && tr.slacks)
    for (int j = 0; j < L.N; ++j) z[L.v(j)] = (*tr.slacks)[j];
  return z;
}

/// Dimension and index map of a transcribed program, for debugging.
inline nlohmann::json layout_json(const NlpProblem& nlp) {
  nlohmann::json j;
  j["n_vars"] = nlp.n_vars;
  j["n_eq"] = nlp.n_eq;
  j["n_ineq"] = nlp.n_ineq;
  if (nlp.layout) {
    const auto& L = *nlp.layout;
    j["N"] = L.N;
    j["n"] = L.n;
    j["m"] = L.m;
    j["x_offset"] = L.x(0);
    j["u_offset"] = L.u(0);
    if (L.has_slack) j["v_offset"] = L.v(0);
  }
  const auto& r = nlp.rows;
  j["rows"] = {{"dynamics", r.dynamics}, {"psi", r.psi},   {"mixed", r.mixed}, {"nonneg", r.nonneg},
               {"comp", r.comp},         {"cap", r.cap},   {"c0", r.c0},       {"c0_count", r.c0_count}};
  j["pinned_initial_state"] = nlp.lower.size() > 0;
  return j;
}

}  // namespace sweep
