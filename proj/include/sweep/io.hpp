#pragma once

#include "sweep/nlp_solver.hpp"
#include "sweep/sweep_sim.hpp"
#include "sweep/trajectory.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sweep::io {

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Trajectory CSV: header t,x1..xn,u1..um,v and one row per node. The control and slack cells of
/// node N are empty; the v column is present only when the trajectory carries slacks.
inline std::string trajectory_csv(const StateTrajectory& tr) {
  tr.validate();
  const int n = tr.state_dim();
  const int m = tr.control_dim();
  std::ostringstream os;
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",u" << i;
  if (tr.slacks) os << ",v";
  os << "\n";
  for (int j = 0; j <= tr.grid.N; ++j) {
    os << format_double(tr.grid.t(j));
    for (int i = 0; i < n; ++i) os << "," << format_double(tr.states[j][i]);
    for (int i = 0; i < m; ++i) os << "," << (j < tr.grid.N ? format_double(tr.controls[j][i]) : "");
    if (tr.slacks) os << "," << (j < tr.grid.N ? format_double((*tr.slacks)[j]) : "");
    os << "\n";
  }
  return os.str();
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, int row) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || end != s.data() + s.size() || (ec != std::errc() && ec != std::errc::result_out_of_range))
    throw IoError("csv row " + std::to_string(row) + ": not a number '" + s + "'");
  return v;
}

inline StateTrajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw IoError("csv: empty input");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") throw IoError("csv: header must start with t");
  int n = 0, m = 0;
  bool has_v = false;
  for (std::size_t k = 1; k < header.size(); ++k) {
    const auto& h = header[k];
    if (h == "v") has_v = true;
    else if (h.size() > 1 && h[0] == 'x') ++n;
    else if (h.size() > 1 && h[0] == 'u') ++m;
    else throw IoError("csv: unknown column '" + h + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line))
    if (!line.empty()) rows.push_back(split(line));
  if (rows.size() < 2) throw IoError("csv: need at least two nodes");
  const int N = static_cast<int>(rows.size()) - 1;
  StateTrajectory tr{Grid(N), {}, {}, std::nullopt};
  std::vector<double> v;
  for (int j = 0; j <= N; ++j) {
    const auto& r = rows[static_cast<std::size_t>(j)];
    if (r.size() != header.size()) throw IoError("csv row " + std::to_string(j + 1) + ": wrong number of cells");
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = parse_double(r[1 + i], j + 1);
    tr.states.push_back(x);
    if (j == N) break;
    Vec u(m);
    for (int i = 0; i < m; ++i) u[i] = parse_double(r[1 + n + i], j + 1);
    tr.controls.push_back(u);
    if (has_v) v.push_back(parse_double(r[1 + n + m], j + 1));
  }
  if (has_v) tr.slacks = v;
  return tr;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

inline void write_trajectory_csv(const std::string& path, const StateTrajectory& tr) {
  write_file(path, trajectory_csv(tr));
}

inline StateTrajectory read_trajectory_csv(const std::string& path) { return parse_trajectory_csv(read_file(path)); }

inline void write_json(const std::string& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vec json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

inline nlohmann::json to_json(const SolveResult& r) {
  nlohmann::json j;
  j["status"] = to_string(r.status);
  j["objective"] = r.objective;
  j["iterations"] = r.iterations;
  j["inner_iterations"] = r.inner_iterations;
  j["penalty"] = r.penalty;
  j["kkt"] = {{"stationarity", r.kkt.stationarity},
              {"primal_feas", r.kkt.primal_feas},
              {"dual_feas", r.kkt.dual_feas},
              {"complementarity", r.kkt.complementarity}};
  j["z_star"] = vec_json(r.z_star);
  j["mu_eq"] = vec_json(r.mu_eq);
  j["mu_ineq"] = vec_json(r.mu_ineq);
  return j;
}

inline SolveStatus status_from_string(const std::string& s) {
  if (s == "converged") return SolveStatus::converged;
  if (s == "max_iter") return SolveStatus::max_iter;
  if (s == "infeasible") return SolveStatus::infeasible;
  throw IoError("unknown solve status '" + s + "'");
}

inline SolveResult solve_result_from_json(const nlohmann::json& j) {
  SolveResult r;
  r.status = status_from_string(j.at("status"));
  r.objective = j.at("objective");
  r.iterations = j.at("iterations");
  r.inner_iterations = j.at("inner_iterations");
  r.penalty = j.at("penalty");
  const auto& k = j.at("kkt");
  r.kkt.stationarity = k.at("stationarity");
  r.kkt.primal_feas = k.at("primal_feas");
  r.kkt.dual_feas = k.at("dual_feas");
  r.kkt.complementarity = k.at("complementarity");
  r.z_star = json_vec(j.at("z_star"));
  r.mu_eq = json_vec(j.at("mu_eq"));
  r.mu_ineq = json_vec(j.at("mu_ineq"));
  return r;
}

inline std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream os;
  os << "gamma,N,gap\n";
  for (const auto& r : t.rows) os << format_double(r.gamma) << "," << r.N << "," << format_double(r.gap) << "\n";
  return os.str();
}

}  // namespace sweep::io
