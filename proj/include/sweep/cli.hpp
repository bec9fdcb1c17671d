#pragma once

#include "sweep/certify.hpp"
#include "sweep/io.hpp"
#include "sweep/pipeline.hpp"
#include "sweep/problems.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace sweep::cli {

enum ExitCode { kOk = 0, kChecksFailed = 1, kConfigError = 2, kNumericalFailure = 3 };

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Defect {
  std::string field;  // one of the gradient_check field names
  double scale = 1.01;
};

/// Settings of one sweepctl run, parsed from a JSON config file.
struct RunConfig {
  std::string problem;
  int N = 100;
  TranscriptionMode mode = TranscriptionMode::penalty;
  std::optional<double> gamma;
  double delta = 0.0;
  std::optional<double> rho;
  std::vector<double> epsilon_schedule = default_epsilon_schedule();
  std::vector<double> gammas;
  std::vector<int> grids;
  int substeps = 10;
  std::optional<Vec> control;
  double kkt_tol = 1e-8;
  int max_outer = 50;
  int max_inner = 500;
  Tolerances tolerances;
  std::uint64_t seed = 0;
  std::string out;
  std::string trajectory;
  std::optional<Defect> defect;
  std::string mixed = "default";  // "default" | "u_squared"
  int sample_budget = 1000;
  int gradient_points = 100;

  double gamma_or(double fallback) const { return gamma ? *gamma : fallback; }
};

inline const char* config_help() {
  return R"(Config keys (JSON object; unknown keys are rejected):
  problem          catalog name (required): disk-push, interval-1d, interior-classical, ellipse-steer
  N                grid intervals, default 100
  mode             "penalty" (default) or "complementarity"
  gamma            penalty parameter; solve defaults to 200, simulate writes a penalty run only when set
  delta            mixed-constraint relaxation in penalty mode, default 0
  rho              truncation bound on |v grad psi|, default from the problem
  epsilon_schedule decreasing relaxation levels, default [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
  gammas, grids    lists for converge
  substeps         implicit-Euler substeps per interval for penalty simulation, default 10
  control          constant control for simulate/converge; default is the reference control, else 0
  kkt_tol          NLP KKT tolerance, default 1e-8
  max_outer        augmented-Lagrangian outer iterations, default 50
  max_inner        inner iterations per outer step, default 500
  tolerances       {adjoint 1e-4, boundary 1e-6, condition5 1e-4, stationarity 1e-3,
                    transversality 1e-8, z1_identity 1e-6, samples 200, active_tol}
  seed             RNG seed for sampling, default 0
  out              output directory, default runs/<problem>-<mode>-<timestamp>
  trajectory       trajectory CSV for the regularity check
  defect           {field, scale}: multiplies one analytic derivative for check (f_x, f_u,
                   psi_grad, psi_hess, h_x, h_u, g_grad)
  mixed            "default" or "u_squared" (replaces h by |u|^2 for check)
  sample_budget    samples for the assumption check, default 1000
  gradient_points  probe points for the derivative check, default 100)";
}

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown config key '" + where + it.key() + "'");
}

template <class T>
T get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown(j,
                         {"problem", "N", "mode", "gamma", "delta", "rho", "epsilon_schedule", "gammas", "grids",
                          "substeps", "control", "kkt_tol", "max_outer", "max_inner", "tolerances", "seed", "out",
                          "trajectory", "defect", "mixed", "sample_budget", "gradient_points"},
                         "");
  RunConfig c;
  if (!j.contains("problem")) throw ConfigError("missing required config field 'problem'");
  c.problem = detail::get<std::string>(j, "problem");
  if (j.contains("N")) c.N = detail::get<int>(j, "N");
  if (j.contains("mode")) {
    const auto m = detail::get<std::string>(j, "mode");
    if (m == "penalty") c.mode = TranscriptionMode::penalty;
    else if (m == "complementarity") c.mode = TranscriptionMode::complementarity;
    else throw ConfigError("config field 'mode' must be penalty or complementarity");
  }
  if (j.contains("gamma")) c.gamma = detail::get<double>(j, "gamma");
  if (j.contains("delta")) c.delta = detail::get<double>(j, "delta");
  if (j.contains("rho")) c.rho = detail::get<double>(j, "rho");
  if (j.contains("epsilon_schedule")) c.epsilon_schedule = detail::get<std::vector<double>>(j, "epsilon_schedule");
  if (j.contains("gammas")) c.gammas = detail::get<std::vector<double>>(j, "gammas");
  if (j.contains("grids")) c.grids = detail::get<std::vector<int>>(j, "grids");
  if (j.contains("substeps")) c.substeps = detail::get<int>(j, "substeps");
  if (j.contains("control")) c.control = io::json_vec(j.at("control"));
  if (j.contains("kkt_tol")) c.kkt_tol = detail::get<double>(j, "kkt_tol");
  if (j.contains("max_outer")) c.max_outer = detail::get<int>(j, "max_outer");
  if (j.contains("max_inner")) c.max_inner = detail::get<int>(j, "max_inner");
  if (j.contains("seed")) c.seed = detail::get<std::uint64_t>(j, "seed");
  if (j.contains("out")) c.out = detail::get<std::string>(j, "out");
  if (j.contains("trajectory")) c.trajectory = detail::get<std::string>(j, "trajectory");
  if (j.contains("mixed")) {
    c.mixed = detail::get<std::string>(j, "mixed");
    if (c.mixed != "default" && c.mixed != "u_squared") throw ConfigError("config field 'mixed' must be default or u_squared");
  }
  if (j.contains("sample_budget")) c.sample_budget = detail::get<int>(j, "sample_budget");
  if (j.contains("gradient_points")) c.gradient_points = detail::get<int>(j, "gradient_points");
  if (j.contains("defect")) {
    const auto& d = j.at("defect");
    if (!d.is_object()) throw ConfigError("config field 'defect' must be an object");
    detail::reject_unknown(d, {"field", "scale"}, "defect.");
    Defect df;
    if (!d.contains("field")) throw ConfigError("missing required config field 'defect.field'");
    df.field = detail::get<std::string>(d, "field");
    if (d.contains("scale")) df.scale = detail::get<double>(d, "scale");
    static const std::set<std::string> fields{"f_x", "f_u", "psi_grad", "psi_hess", "h_x", "h_u", "g_grad"};
    if (!fields.count(df.field)) throw ConfigError("config field 'defect.field' names no derivative: " + df.field);
    c.defect = df;
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    if (!t.is_object()) throw ConfigError("config field 'tolerances' must be an object");
    detail::reject_unknown(t,
                           {"adjoint", "boundary", "condition5", "stationarity", "transversality", "z1_identity",
                            "samples", "active_tol"},
                           "tolerances.");
    auto& T = c.tolerances;
    if (t.contains("adjoint")) T.adjoint = detail::get<double>(t, "adjoint");
    if (t.contains("boundary")) T.boundary = detail::get<double>(t, "boundary");
    if (t.contains("condition5")) T.condition5 = detail::get<double>(t, "condition5");
    if (t.contains("stationarity")) T.stationarity = detail::get<double>(t, "stationarity");
    if (t.contains("transversality")) T.transversality = detail::get<double>(t, "transversality");
    if (t.contains("z1_identity")) T.z1_identity = detail::get<double>(t, "z1_identity");
    if (t.contains("samples")) T.samples = detail::get<int>(t, "samples");
    if (t.contains("active_tol")) T.active_tol = detail::get<double>(t, "active_tol");
  }
  if (c.N < 2) throw ConfigError("config field 'N' must be at least 2");
  if (c.substeps < 1) throw ConfigError("config field 'substeps' must be at least 1");
  if (!(c.kkt_tol > 0.0 && c.kkt_tol <= 1e-2)) throw ConfigError("config field 'kkt_tol' must lie in (0, 1e-2]");
  if (c.max_outer < 1 || c.max_inner < 1) throw ConfigError("config fields 'max_outer' and 'max_inner' must be positive");
  if (c.tolerances.samples < 1) throw ConfigError("config field 'tolerances.samples' must be positive");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = io::read_json(path);
  } catch (const io::IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(j);
}

/// Canonical JSON form of a config, stored with solve outputs so certify can rebuild the program.
inline nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["problem"] = c.problem;
  j["N"] = c.N;
  j["mode"] = to_string(c.mode);
  if (c.gamma) j["gamma"] = *c.gamma;
  j["delta"] = c.delta;
  if (c.rho) j["rho"] = *c.rho;
  j["epsilon_schedule"] = c.epsilon_schedule;
  j["substeps"] = c.substeps;
  j["kkt_tol"] = c.kkt_tol;
  j["max_outer"] = c.max_outer;
  j["max_inner"] = c.max_inner;
  j["seed"] = c.seed;
  return j;
}

inline ProblemSpec load_problem(const RunConfig& c) {
  try {
    return problems::get(c.problem).spec;
  } catch (const problems::UnknownProblemError& e) {
    throw ConfigError(e.what());
  }
}

inline std::string output_dir(const RunConfig& c, const std::optional<std::string>& override_dir) {
  if (override_dir && !override_dir->empty()) return *override_dir;
  if (!c.out.empty()) return c.out;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  return "runs/" + c.problem + "-" + to_string(c.mode) + "-" + stamp;
}

inline void require_admissible_gamma(const ProblemSpec& p, double gamma, std::uint64_t seed) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("config field 'gamma' must be positive");
  const double lo = check_assumptions(p, 200, seed).min_gamma();
  if (gamma < lo)
    throw ConfigError("config field 'gamma' = " + io::format_double(gamma) + " is below the admissible bound 2M/eta = " +
                      io::format_double(lo));
}

inline std::function<Vec(double)> control_law(const RunConfig& c, const ProblemSpec& p) {
  if (c.control) {
    require_dim(c.control->size(), p.m(), "config control");
    const Vec u = *c.control;
    return [u](double) { return u; };
  }
  const auto entry = problems::get(c.problem);
  if (entry.reference) return entry.reference->control;
  const Vec zero = Vec::Zero(p.m());
  return [zero](double) { return zero; };
}

inline ControlSignal sample_control(const std::function<Vec(double)>& law, int N) {
  const Grid grid(N);
  std::vector<Vec> u;
  for (int j = 0; j < N; ++j) u.push_back(law(grid.t(j)));
  return ControlSignal(grid, u);
}

inline TranscriptionConfig transcription_config(const RunConfig& c) {
  TranscriptionConfig t;
  t.N = c.N;
  t.mode = c.mode;
  t.gamma = c.gamma_or(200.0);
  t.delta = c.delta;
  t.rho = c.rho;
  if (c.mode == TranscriptionMode::complementarity && !c.epsilon_schedule.empty()) t.epsilon = c.epsilon_schedule.back();
  return t;
}

inline SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.tol = c.kkt_tol;
  o.max_outer = c.max_outer;
  o.max_inner = c.max_inner;
  return o;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io::IoError("cannot create output directory " + dir + ": " + ec.message());
}

inline std::string join(const std::string& dir, const char* file) { return (std::filesystem::path(dir) / file).string(); }

// ---------------------------------------------------------------------------
// Commands. Each returns an exit code; messages go to `out`, errors to `err`.

inline int cmd_simulate(const RunConfig& c, const std::string& dir, std::ostream& out) {
  const auto p = load_problem(c);
  if (c.gamma) require_admissible_gamma(p, *c.gamma, c.seed);
  const auto ctrl = sample_control(control_law(c, p), c.N);
  ensure_dir(dir);
  const auto catchup = simulate_catchup(p, ctrl);
  io::write_trajectory_csv(join(dir, "catchup.csv"), catchup);
  out << "catchup.csv: " << c.N + 1 << " nodes\n";
  if (c.gamma) {
    const auto pen = simulate_penalty(p, ctrl, *c.gamma, c.substeps);
    io::write_trajectory_csv(join(dir, "penalty.csv"), pen);
    out << "penalty.csv: " << c.N + 1 << " nodes, sup gap to catch-up " << io::format_double(sup_gap(pen, catchup))
        << "\n";
  }
  return kOk;
}

inline int cmd_solve(const RunConfig& c, const std::string& dir, std::ostream& out) {
  const auto p = load_problem(c);
  auto tc = transcription_config(c);
  if (c.mode == TranscriptionMode::penalty) require_admissible_gamma(p, tc.gamma, c.seed);
  try {
    tc.validate();
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (c.mode == TranscriptionMode::complementarity) {
    if (c.epsilon_schedule.empty()) throw ConfigError("config field 'epsilon_schedule' is empty");
    for (std::size_t k = 1; k < c.epsilon_schedule.size(); ++k)
      if (!(c.epsilon_schedule[k] < c.epsilon_schedule[k - 1]))
        throw ConfigError("config field 'epsilon_schedule' must decrease");
  }
  const auto run = solve_route(p, tc, c.epsilon_schedule, solver_options(c));
  ensure_dir(dir);
  io::write_trajectory_csv(join(dir, "trajectory.csv"), run.trajectory);
  nlohmann::json j;
  j["config"] = config_json(c);
  j["epsilon"] = run.cfg.epsilon;
  j["epsilon_stages"] = run.epsilon_stages;
  j["nlp_objective"] = run.nlp_objective;
  j["route_objective"] = run.route_objective;
  j["result"] = io::to_json(run.result);
  io::write_json(join(dir, "solve.json"), j);
  out << "status " << to_string(run.result.status) << "  objective " << io::format_double(run.route_objective)
      << "  nlp objective " << io::format_double(run.nlp_objective) << "  kkt " << io::format_double(run.result.kkt.max())
      << "  outer " << run.result.iterations << "\n";
  return run.converged() ? kOk : kNumericalFailure;
}

inline std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

inline void print_report(const ResidualReport& r, std::ostream& out) {
  out << std::left << std::setw(22) << "condition" << std::setw(12) << "residual" << std::setw(12) << "tolerance"
      << std::setw(8) << "node" << "result\n";
  for (const auto& c : r.conditions) {
    out << std::setw(22) << c.id << std::setw(12) << short_double(c.residual) << std::setw(12)
        << (std::isfinite(c.tolerance) ? short_double(c.tolerance) : std::string("-")) << std::setw(8) << c.worst_node
        << (c.diagnostic ? "info" : (c.pass ? "pass" : "FAIL")) << "\n";
  }
  for (const auto& n : r.notes) out << "note: " << n << "\n";
  out << (r.passed() ? "all conditions pass\n" : "conditions failed\n");
}

inline int cmd_certify(const RunConfig& c, const std::string& dir, std::ostream& out) {
  const std::string path = join(dir, "solve.json");
  if (!std::filesystem::exists(path)) throw ConfigError("no solve output at " + path + "; run solve first");
  const auto solved = io::read_json(path);
  RunConfig sc = parse_config(solved.at("config"));
  sc.tolerances = c.tolerances;
  const auto p = load_problem(sc);
  auto tc = transcription_config(sc);
  tc.epsilon = solved.at("epsilon");
  const auto res = io::solve_result_from_json(solved.at("result"));
  if (res.status != SolveStatus::converged) {
    out << "solve did not converge (" << to_string(res.status) << "); nothing to certify\n";
    return kNumericalFailure;
  }
  const auto nlp = transcribe(p, tc);
  const auto tr = extract_trajectory(nlp, res.z_star);
  Tolerances tol = sc.tolerances;
  tol.seed = c.seed;
  ResidualReport rep;
  nlohmann::json cert;
  if (tc.mode == TranscriptionMode::penalty) {
    const auto rc = extract_regular(p, tc, nlp, res, tc.gamma);
    rep = verify_regular(p, tr, rc, tol);
    cert = to_json(rc);
  } else {
    const auto nc = extract_nonregular(p, tc, nlp, res, tc.epsilon);
    rep = verify_nonregular(p, tr, nc, tol);
    cert = to_json(nc);
  }
  io::write_json(join(dir, "certificate.json"), cert);
  io::write_json(join(dir, "report.json"), to_json(rep));
  print_report(rep, out);
  return rep.passed() ? kOk : kChecksFailed;
}

inline int cmd_converge(const RunConfig& c, const std::string& dir, std::ostream& out) {
  if (c.gammas.empty()) throw ConfigError("config field 'gammas' is empty");
  if (c.grids.empty()) throw ConfigError("config field 'grids' is empty");
  for (int N : c.grids)
    if (N < 1) throw ConfigError("config field 'grids' must hold positive integers");
  for (std::size_t k = 1; k < c.gammas.size(); ++k)
    if (!(c.gammas[k] > c.gammas[k - 1])) throw ConfigError("config field 'gammas' must increase");
  const auto p = load_problem(c);
  for (double g : c.gammas) require_admissible_gamma(p, g, c.seed);
  const auto table = convergence_study(p, control_law(c, p), c.gammas, c.grids, c.substeps);
  ensure_dir(dir);
  io::write_file(join(dir, "convergence.csv"), io::convergence_csv(table));
  nlohmann::json s;
  s["problem"] = c.problem;
  s["gammas"] = c.gammas;
  s["grids"] = c.grids;
  s["monotone"] = table.decreasing_in_gamma();
  s["monotone_by_grid"] = nlohmann::json::array();
  for (std::size_t ni = 0; ni < c.grids.size(); ++ni)
    s["monotone_by_grid"].push_back({{"N", c.grids[ni]}, {"monotone", table.decreasing_in_gamma(ni)}});
  s["final_gap"] = nlohmann::json::array();
  for (std::size_t ni = 0; ni < c.grids.size(); ++ni)
    s["final_gap"].push_back({{"N", c.grids[ni]}, {"gap", table.gap(c.gammas.size() - 1, ni)}});
  io::write_json(join(dir, "convergence_summary.json"), s);
  for (const auto& r : table.rows) out << "gamma " << r.gamma << "  N " << r.N << "  gap " << io::format_double(r.gap) << "\n";
  out << "monotone in gamma: " << (table.decreasing_in_gamma() ? "yes" : "no") << "\n";
  return table.decreasing_in_gamma() ? kOk : kChecksFailed;
}

/// Applies the config's defect injection and mixed-constraint override to a catalog problem.
inline ProblemSpec apply_overrides(ProblemSpec p, const RunConfig& c) {
  if (c.mixed == "u_squared") {
    p.h.eval = [](const Vec&, const Vec& u) { return u.squaredNorm(); };
    p.h.grad_x = [](const Vec& x, const Vec&) -> Vec { return Vec::Zero(x.size()); };
    p.h.grad_u = [](const Vec&, const Vec& u) -> Vec { return 2.0 * u; };
  }
  if (c.defect) {
    const double s = c.defect->scale;
    const auto& f = c.defect->field;
    if (f == "f_x") p.f.jac_x = [g = p.f.jac_x, s](const Vec& x, const Vec& u) -> Mat { return s * g(x, u); };
    if (f == "f_u") p.f.jac_u = [g = p.f.jac_u, s](const Vec& x, const Vec& u) -> Mat { return s * g(x, u); };
    if (f == "psi_grad") p.psi.grad = [g = p.psi.grad, s](const Vec& x) -> Vec { return s * g(x); };
    if (f == "psi_hess") p.psi.hess = [g = p.psi.hess, s](const Vec& x) -> Mat { return s * g(x); };
    if (f == "h_x") p.h.grad_x = [g = p.h.grad_x, s](const Vec& x, const Vec& u) -> Vec { return s * g(x, u); };
    if (f == "h_u") p.h.grad_u = [g = p.h.grad_u, s](const Vec& x, const Vec& u) -> Vec { return s * g(x, u); };
    if (f == "g_grad") p.g.grad = [g = p.g.grad, s](const Vec& x) -> Vec { return s * g(x); };
  }
  return p;
}

inline int cmd_check(const RunConfig& c, std::ostream& out) {
  const auto p = apply_overrides(load_problem(c), c);
  bool clean = true;
  const auto a = check_assumptions(p, c.sample_budget, c.seed);
  out << "assumptions: M_est " << io::format_double(a.M_est) << "  eta_est " << io::format_double(a.eta_est)
      << "  min gamma " << io::format_double(a.min_gamma()) << "\n";
  for (const auto& v : a.violations) {
    out << "  violation " << v.assumption << ": " << v.detail << "\n";
    clean = false;
  }
  const auto g = gradient_check(p, c.gradient_points, c.seed);
  for (const auto& [name, err] : g.fields) {
    const bool ok = err <= 1e-6;
    out << "  derivative " << name << "  rel err " << io::format_double(err) << (ok ? "" : "  FAIL") << "\n";
    clean = clean && ok;
  }
  if (!clean && g.worst() > 1e-6) out << "derivative mismatch in field " << g.worst_field() << "\n";
  if (!c.trajectory.empty()) {
    StateTrajectory tr;
    try {
      tr = io::read_trajectory_csv(c.trajectory);
    } catch (const io::IoError& e) {
      throw ConfigError(std::string("config field 'trajectory': ") + e.what());
    }
    const auto m = regularity_margin(p, tr, c.tolerances.active_tol);
    if (m.margin) {
      out << "regularity: margin " << io::format_double(*m.margin) << " over " << m.active_count
          << " active nodes (worst node " << m.worst_node << ")\n";
    } else {
      out << "regularity: mixed constraint never active\n";
    }
    if (!m.regular()) {
      out << "warning: mixed constraint is non-regular along the trajectory\n";
      clean = false;
    }
  }
  out << (clean ? "check clean\n" : "check failed\n");
  return clean ? kOk : kChecksFailed;
}

/// Runs one command and maps exceptions to exit codes.
inline int run(const std::string& command, const std::string& config_path, const std::optional<std::string>& out_dir,
               std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  try {
    RunConfig c = load_config(config_path);
    if (seed) c.seed = *seed;
    if (command == "check") return cmd_check(c, out);
    if (command == "certify") {
      if ((!out_dir || out_dir->empty()) && c.out.empty())
        throw ConfigError("certify needs the solve output directory (--out or config field 'out')");
      return cmd_certify(c, output_dir(c, out_dir), out);
    }
    const std::string dir = output_dir(c, out_dir);
    if (command == "simulate") return cmd_simulate(c, dir, out);
    if (command == "solve") return cmd_solve(c, dir, out);
    if (command == "converge") return cmd_converge(c, dir, out);
    err << "unknown command '" << command << "'\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const problems::UnknownProblemError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DimensionMismatchError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const io::IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "malformed input: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace sweep::cli
