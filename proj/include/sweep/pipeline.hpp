#pragma once

#include "sweep/model.hpp"
#include "sweep/nlp_solver.hpp"
#include "sweep/sweep_sim.hpp"
#include "sweep/transcribe.hpp"

#include <vector>

namespace sweep {

/// Outcome of a transcribed solve.
struct RouteResult {
  TranscriptionConfig cfg;
  NlpProblem nlp;
  SolveResult result;
  StateTrajectory trajectory;
  double nlp_objective = 0.0;
  double route_objective = 0.0;       // objective of the catch-up response to the optimal controls
  std::vector<double> epsilon_stages; // completed relaxation stages (complementarity route)

  bool converged() const { return result.status == SolveStatus::converged; }
};

inline std::vector<double> default_epsilon_schedule() { return {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

namespace detail {

inline double catchup_objective(const ProblemSpec& p, const StateTrajectory& tr) {
  const Vec x0 = p.c0.empty() ? p.x0 : tr.states.front();
  return p.objective(simulate_catchup(p, tr.control_signal(), x0));
}

inline ControlSignal zero_control(const ProblemSpec& p, int N) {
  return ControlSignal::constant(Grid(N), Vec::Zero(p.m()));
}

}  // namespace detail

/// Solves the implicit-Euler penalty program from the zero-control penalty trajectory.
inline RouteResult solve_penalty_route(const ProblemSpec& p, TranscriptionConfig cfg, const SolverOptions& opt = {}) {
  cfg.mode = TranscriptionMode::penalty;
  RouteResult out;
  out.cfg = cfg;
  out.nlp = transcribe_penalty(p, cfg);
  const auto guess = simulate_penalty(p, detail::zero_control(p, cfg.N), cfg.gamma, 10, p.x0);
  out.result = solve(out.nlp, flatten(*out.nlp.layout, guess), opt);
  out.trajectory = extract_trajectory(out.nlp, out.result.z_star);
  out.nlp_objective = out.result.objective;
  out.route_objective = detail::catchup_objective(p, out.trajectory);
  return out;
}

/// Solves the relaxed complementarity program along a decreasing ε schedule, warm-starting each stage
/// from the previous primal point and multipliers. Stops at the first stage that fails to converge.
inline RouteResult solve_complementarity_route(const ProblemSpec& p, TranscriptionConfig cfg,
                                               std::vector<double> schedule = default_epsilon_schedule(),
                                               const SolverOptions& opt = {}) {
  if (schedule.empty()) throw InvalidArgumentError("epsilon schedule is empty");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k] < schedule[k - 1])) throw InvalidArgumentError("epsilon schedule must decrease");
  cfg.mode = TranscriptionMode::complementarity;
  RouteResult out;
  auto guess = simulate_catchup(p, detail::zero_control(p, cfg.N), p.x0);
  guess.slacks = std::vector<double>(static_cast<std::size_t>(cfg.N), 0.0);
  Vec z;
  Vec mu_eq, mu_ineq;
  for (double eps : schedule) {
    cfg.epsilon = eps;
    out.cfg = cfg;
    out.nlp = transcribe_complementarity(p, cfg);
    if (z.size() == 0) z = flatten(*out.nlp.layout, guess);
    out.result = solve(out.nlp, z, opt, mu_eq.size() ? &mu_eq : nullptr, mu_ineq.size() ? &mu_ineq : nullptr);
    if (!out.converged()) break;
    out.epsilon_stages.push_back(eps);
    z = out.result.z_star;
    mu_eq = out.result.mu_eq;
    mu_ineq = out.result.mu_ineq;
  }
  out.trajectory = extract_trajectory(out.nlp, out.result.z_star);
  out.nlp_objective = out.result.objective;
  out.route_objective = detail::catchup_objective(p, out.trajectory);
  return out;
}

inline RouteResult solve_route(const ProblemSpec& p, const TranscriptionConfig& cfg,
                               const std::vector<double>& schedule = default_epsilon_schedule(),
                               const SolverOptions& opt = {}) {
  return cfg.mode == TranscriptionMode::penalty ? solve_penalty_route(p, cfg, opt)
                                                : solve_complementarity_route(p, cfg, schedule, opt);
}

}  // namespace sweep
