#include "sweep/certify.hpp"
#include "sweep/cli.hpp"
#include "sweep/io.hpp"
#include "sweep/nlp_solver.hpp"
#include "sweep/pipeline.hpp"
#include "sweep/problems.hpp"
#include "sweep/sweep_sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sweep;
using problems::vec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

/// Runs one criterion, times it and prints a single PASS/FAIL line.
void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << id << ". " << name << ": " << o.detail << " (" << num(secs) << " s of "
            << budget_s << " s" << (in_time ? "" : ", over budget") << ")" << std::endl;
}

// Hand KKT programs -----------------------------------------------------------

NlpProblem equality_quadratic() {
  NlpProblem nlp;
  nlp.n_vars = 2;
  nlp.n_eq = 1;
  nlp.objective = [](const Vec& z) { return (z[0] - 1.0) * (z[0] - 1.0) + z[1] * z[1]; };
  nlp.objective_grad = [](const Vec& z) { return vec({2.0 * (z[0] - 1.0), 2.0 * z[1]}); };
  nlp.eq = [](const Vec& z) { return vec({z[0] + z[1] - 1.0}); };
  nlp.eq_jac = dense_jacobian([](const Vec&) -> Mat { return Mat::Ones(1, 2); });
  return nlp;
}

NlpProblem inequality_quadratic() {
  NlpProblem nlp;
  nlp.n_vars = 1;
  nlp.n_ineq = 1;
  nlp.objective = [](const Vec& z) { return z[0] * z[0]; };
  nlp.objective_grad = [](const Vec& z) { return vec({2.0 * z[0]}); };
  nlp.ineq = [](const Vec& z) { return vec({1.0 - z[0]}); };
  nlp.ineq_jac = dense_jacobian([](const Vec&) -> Mat { return Mat::Constant(1, 1, -1.0); });
  return nlp;
}

NlpProblem bounded_rosenbrock() {
  NlpProblem nlp;
  nlp.n_vars = 2;
  nlp.objective = [](const Vec& z) { return 100.0 * std::pow(z[1] - z[0] * z[0], 2) + std::pow(1.0 - z[0], 2); };
  nlp.objective_grad = [](const Vec& z) {
    return vec({-400.0 * z[0] * (z[1] - z[0] * z[0]) - 2.0 * (1.0 - z[0]), 200.0 * (z[1] - z[0] * z[0])});
  };
  nlp.upper = vec({0.5, std::numeric_limits<double>::infinity()});
  return nlp;
}

TranscriptionConfig route_cfg(TranscriptionMode mode) {
  TranscriptionConfig c;
  c.N = 200;
  c.mode = mode;
  c.gamma = 200.0;
  return c;
}

// Criteria ----------------------------------------------------------------------

Outcome derivative_integrity() {
  double worst = 0.0;
  std::string where;
  for (const auto& name : problems::list_catalog()) {
    const auto r = gradient_check(problems::get(name).spec, 100, 7);
    if (r.worst() >= worst) {
      worst = r.worst();
      where = name + "/" + r.worst_field();
    }
  }
  return {worst <= 1e-6, "worst relative error " + num(worst) + " at " + where};
}

Outcome projection_oracle() {
  const auto disk = problems::get("disk-push").spec;
  const auto ellipse = problems::get("ellipse-steer").spec;  // semi-axes (2, 1)
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const Vec x = vec({d(rng), d(rng)});
    const Vec exact = x.norm() <= 1.0 ? x : Vec(x / x.norm());
    worst = std::max(worst, (project_onto_C(disk, x) - exact).norm());
  }
  for (int k = 0; k < 500; ++k) {
    const double s = d(rng);
    const bool first = k % 2 == 0;
    const Vec x = first ? vec({s, 0.0}) : vec({0.0, s});
    const double a = first ? 2.0 : 1.0;
    const double c = std::clamp(s, -a, a);
    const Vec exact = first ? vec({c, 0.0}) : vec({0.0, c});
    worst = std::max(worst, (project_onto_C(ellipse, x) - exact).norm());
  }
  return {worst <= 1e-9, "1000 points, max error " + num(worst)};
}

Outcome catchup_vs_sliding() {
  const auto e = problems::get("disk-push");
  std::vector<double> err;
  for (int N : {50, 100, 200, 400})
    err.push_back(step_sup_error(simulate_catchup(e.spec, ControlSignal::constant(Grid(N), vec({2.0, 0.0}))),
                                 e.reference->state));
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < err.size(); ++k) min_ratio = std::min(min_ratio, err[k - 1] / err[k]);
  return {err.back() <= 0.01 && min_ratio >= 1.3,
          "error at N=400 " + num(err.back()) + ", smallest refinement ratio " + num(min_ratio)};
}

Outcome penalty_convergence() {
  const auto e = problems::get("disk-push");
  const auto table = convergence_study(e.spec, e.reference->control, {25.0, 50.0, 100.0, 200.0}, {400}, 10);
  std::string gaps;
  for (const auto& r : table.rows) gaps += (gaps.empty() ? "" : ", ") + num(r.gap);
  return {table.decreasing_in_gamma() && table.rows.back().gap <= 0.05, "gaps " + gaps};
}

Outcome solver_correctness() {
  const auto a = solve(equality_quadratic(), vec({0.0, 0.0}), 1e-8);
  const auto b = solve(inequality_quadratic(), vec({3.0}), 1e-8);
  const auto c = solve(bounded_rosenbrock(), vec({0.0, 0.0}), 1e-8);
  const double kkt = std::max({a.kkt.max(), b.kkt.max(), c.kkt.max()});
  const double mult = std::max({std::abs(a.mu_eq[0] - 0.0), std::abs(b.mu_ineq[0] - 2.0), std::abs(c.mu_ineq[0] - 1.0)});
  const double primal = std::max({(a.z_star - vec({1.0, 0.0})).norm(), std::abs(b.z_star[0] - 1.0),
                                  (c.z_star - vec({0.5, 0.25})).norm()});
  const bool ok = a.status == SolveStatus::converged && b.status == SolveStatus::converged &&
                  c.status == SolveStatus::converged && kkt <= 1e-8 && mult <= 1e-6 && primal <= 1e-6;
  return {ok, "max KKT " + num(kkt) + ", multiplier error " + num(mult) + ", primal error " + num(primal)};
}

Outcome optimal_value_recovery() {
  const auto p = problems::get("interval-1d").spec;
  const auto pen = solve_penalty_route(p, route_cfg(TranscriptionMode::penalty));
  const auto cmp = solve_complementarity_route(p, route_cfg(TranscriptionMode::complementarity));
  const bool ok = pen.converged() && cmp.converged() && std::abs(pen.route_objective + 1.0) <= 1e-3 &&
                  std::abs(cmp.route_objective + 1.0) <= 1e-3 &&
                  std::abs(pen.route_objective - cmp.route_objective) <= 1e-3 && cmp.cfg.epsilon == 1e-6;
  return {ok, "penalty " + num(pen.route_objective) + " (program value " + num(pen.nlp_objective) +
                  "), complementarity " + num(cmp.route_objective) + " at final epsilon " + num(cmp.cfg.epsilon)};
}

Outcome regular_certification() {
  std::ostringstream msg;
  bool ok = true;
  // Interior problem against the classical certificate p ≡ (1,0), λ0 = 1, ν ≡ 1/2 (normalized by 2).
  {
    const auto p = problems::get("interior-classical").spec;
    const auto run = solve_penalty_route(p, route_cfg(TranscriptionMode::penalty));
    const auto c = extract_regular(p, run.cfg, run.nlp, run.result, run.cfg.gamma);
    double dev = std::abs(c.lambda0 - 0.5);
    for (const auto& v : c.p) dev = std::max(dev, (v - vec({0.5, 0.0})).norm());
    for (double v : c.nu) dev = std::max(dev, std::abs(v - 0.25));
    const auto rep = verify_regular(p, run.trajectory, c);
    double worst = 0.0;
    for (const auto* id : {"adjoint", "boundary_terminal", "boundary_initial", "maximum", "condition5"})
      worst = std::max(worst, rep.get(id).residual);
    ok = ok && run.converged() && rep.passed() && dev <= 1e-6 && worst <= 1e-6;
    msg << "interior: deviation from hand certificate " << num(dev) << ", worst residual " << num(worst);
  }
  // Interval problem at default tolerances, then a corrupted costate on the active arc.
  {
    const auto p = problems::get("interval-1d").spec;
    const auto run = solve_penalty_route(p, route_cfg(TranscriptionMode::penalty));
    auto c = extract_regular(p, run.cfg, run.nlp, run.result, run.cfg.gamma);
    const auto rep = verify_regular(p, run.trajectory, c);
    ok = ok && run.converged() && rep.passed();
    msg << "; interval: adjoint " << num(rep.get("adjoint").residual) << (rep.passed() ? " pass" : " FAIL");
    std::vector<int> active;
    for (int j = 1; j < run.cfg.N; ++j)
      if (std::abs(p.h.eval(run.trajectory.states[j], run.trajectory.controls[j])) <= 1e-6) active.push_back(j);
    if (active.empty()) return {false, msg.str() + "; no active node to corrupt"};
    const int node = active[active.size() / 2];
    c.p[node][0] += 0.1;
    const auto failed = verify_regular(p, run.trajectory, c).failed();
    bool adjoint_flagged = false, only_allowed = true;
    std::string flags;
    for (const auto& id : failed) {
      adjoint_flagged = adjoint_flagged || id == "adjoint";
      only_allowed = only_allowed && (id == "adjoint" || id == "condition5");
      flags += (flags.empty() ? "" : "+") + id;
    }
    ok = ok && adjoint_flagged && only_allowed;
    msg << "; corrupting p at node " << node << " flips " << flags;
  }
  return {ok, msg.str()};
}

Outcome nonregular_certification() {
  const auto p = problems::get("interval-1d").spec;
  const auto run = solve_complementarity_route(p, route_cfg(TranscriptionMode::complementarity));
  const auto c = extract_nonregular(p, run.cfg, run.nlp, run.result);
  const auto rep = verify_nonregular(p, run.trajectory, c);
  double stat = 0.0;
  for (const auto* id : {"b_complementarity", "c_costate", "d_s1", "d_s2", "d_s3", "d_s4"})
    stat = std::max(stat, rep.get(id).residual);
  const double trans = rep.get("c_transversality").residual;
  const double z1 = rep.get("z1_identity").residual;
  const double band = std::max(1e-6, 10.0 * c.epsilon);
  int misplaced = 0, atoms = 0;
  for (int j = 0; j <= run.cfg.N; ++j) {
    if (c.zeta2[j] <= 1e-6) continue;
    ++atoms;
    if (std::abs(p.psi.eval(run.trajectory.states[j])) > band) ++misplaced;
  }
  const bool ok = run.converged() && rep.passed() && stat <= 1e-3 && trans <= 1e-8 && z1 <= 1e-6 && misplaced == 0;
  return {ok, "a)-d) " + std::string(rep.passed() ? "pass" : "FAIL") + ", worst stationarity " + num(stat) +
                  ", |lambda(1)| " + num(trans) + ", z1 identity " + num(z1) + ", zeta2 atoms " +
                  std::to_string(atoms) + " with " + std::to_string(misplaced) + " off the contact band"};
}

Outcome regularity_detection() {
  const auto p = problems::get("interval-1d").spec;
  StateTrajectory arc{Grid(20), {}, {}, std::nullopt};
  for (int j = 0; j <= 20; ++j) arc.states.push_back(vec({std::min(0.5 + j / 20.0, 1.0)}));
  for (int j = 0; j < 20; ++j) arc.controls.push_back(vec({1.0}));
  const auto m = regularity_margin(p, arc);
  auto q = p;
  q.h.eval = [](const Vec&, const Vec& u) { return u.squaredNorm(); };
  q.h.grad_x = [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); };
  q.h.grad_u = [](const Vec&, const Vec& u) -> Vec { return 2.0 * u; };
  StateTrajectory flat = arc;
  for (auto& u : flat.controls) u = vec({0.0});
  const auto d = regularity_margin(q, flat);
  const bool ok = m.margin && std::abs(*m.margin - 2.0) <= 1e-12 && m.regular() && d.margin && *d.margin < 1e-6 &&
                  !d.regular();
  return {ok, "interval-1d margin " + num(m.margin.value_or(-1)) + ", h = u^2 margin " + num(d.margin.value_or(-1)) +
                  (d.regular() ? " (regular)" : " (non-regular)")};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sweep_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  struct Job {
    std::string command;
    nlohmann::json config;
    std::vector<std::string> files;
  };
  const std::vector<Job> jobs{
      {"simulate", {{"problem", "disk-push"}, {"N", 100}, {"gamma", 200}}, {"catchup.csv", "penalty.csv"}},
      {"solve", {{"problem", "interval-1d"}, {"N", 100}, {"mode", "complementarity"}}, {"trajectory.csv", "solve.json"}},
      {"certify", {{"problem", "interval-1d"}, {"N", 100}, {"mode", "complementarity"}},
       {"certificate.json", "report.json"}},
      {"solve", {{"problem", "interval-1d"}, {"N", 100}, {"gamma", 200}}, {"trajectory.csv", "solve.json"}},
      {"certify", {{"problem", "interval-1d"}, {"N", 100}, {"gamma", 200}}, {"certificate.json", "report.json"}},
      {"converge", {{"problem", "disk-push"}, {"gammas", {25, 50}}, {"grids", {50}}},
       {"convergence.csv", "convergence_summary.json"}},
      {"check", {{"problem", "ellipse-steer"}}, {}}};
  int compared = 0;
  for (int rep = 0; rep < 2; ++rep) {
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      // solve and the following certify share a directory
      const std::size_t slot = jobs[k].command == "certify" ? k - 1 : k;
      const fs::path dir = root / ("run" + std::to_string(rep)) / std::to_string(slot);
      const auto cfg = (root / ("cfg" + std::to_string(k) + ".json")).string();
      io::write_json(cfg, jobs[k].config);
      std::ostringstream out, err;
      const int code = cli::run(jobs[k].command, cfg, dir.string(), std::uint64_t{5}, out, err);
      io::write_file((dir.parent_path() / ("stdout" + std::to_string(k) + ".txt")).string(), out.str());
      if (code != 0) return {false, jobs[k].command + " exited with " + std::to_string(code) + ": " + err.str()};
    }
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const std::size_t slot = jobs[k].command == "certify" ? k - 1 : k;
    std::vector<fs::path> files;
    for (const auto& f : jobs[k].files) files.push_back(fs::path(std::to_string(slot)) / f);
    files.push_back("stdout" + std::to_string(k) + ".txt");
    for (const auto& f : files) {
      const auto a = io::read_file((root / "run0" / f).string());
      const auto b = io::read_file((root / "run1" / f).string());
      if (a != b) return {false, "outputs differ: " + f.string()};
      ++compared;
    }
  }
  fs::remove_all(root);
  return {true, std::to_string(compared) + " files byte-identical across repeated runs of all five commands"};
}

}  // namespace

int main() {
  criterion(1, "derivative integrity", 5, derivative_integrity);
  criterion(2, "projection oracle", 5, projection_oracle);
  criterion(3, "catch-up vs analytic sliding", 10, catchup_vs_sliding);
  criterion(4, "penalty convergence", 60, penalty_convergence);
  criterion(5, "solver correctness", 5, solver_correctness);
  criterion(6, "optimal-value recovery", 120, optimal_value_recovery);
  criterion(7, "regular-case certification", 120, regular_certification);
  criterion(8, "non-regular certification", 120, nonregular_certification);
  criterion(9, "regularity detection", 5, regularity_detection);
  criterion(10, "determinism", 120, determinism);
  std::cout << (failures == 0 ? "all acceptance criteria pass" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
