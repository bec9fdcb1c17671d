#pragma once

#include "sweep/core.hpp"
#include "sweep/finite_diff.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sweep {

/// Position of x_j, u_j and v_j inside the flat decision vector z = (x_0..x_N, u_0..u_{N-1}, v_0..v_{N-1}).
struct VariableLayout {
  int N = 0;
  int n = 0;
  int m = 0;
  bool has_slack = false;

  int x(int j) const { return j * n; }
  int u(int j) const { return (N + 1) * n + j * m; }
  int v(int j) const { return (N + 1) * n + N * m + j; }
  int size() const { return (N + 1) * n + N * m + (has_slack ? N : 0); }
};

/// Offsets of the constraint families inside the inequality vector (−1 when absent), plus the
/// row offset of the dynamics block inside the equality vector.
struct ConstraintLayout {
  int dynamics = 0;   // eq rows: n per interval
  int psi = -1;       // ψ(x_j) ≤ 0, j = 0..N
  int mixed = -1;     // h(x_j, u_j) − δ ≤ 0, j = 0..N−1
  int nonneg = -1;    // −v_j ≤ 0
  int comp = -1;      // −v_j ψ(x_j) − ε ≤ 0
  int cap = -1;       // |v_j ∇ψ(x_j)|² − ρ² ≤ 0
  int c0 = -1;        // c0ᵢ(x_0) ≤ 0
  int c0_count = 0;
};

/// Smooth program  min F(z)  s.t.  c_E(z) = 0,  c_I(z) ≤ 0,  lower ≤ z ≤ upper.
struct NlpProblem {
  int n_vars = 0;
  int n_eq = 0;
  int n_ineq = 0;
  std::function<double(const Vec&)> objective;
  std::function<Vec(const Vec&)> objective_grad;
  std::function<Vec(const Vec&)> eq;
  std::function<SpMat(const Vec&)> eq_jac;
  std::function<Vec(const Vec&)> ineq;
  std::function<SpMat(const Vec&)> ineq_jac;
  /// ∇²[w₀F + w_Eᵀc_E + w_Iᵀc_I](z). Optional; enables Newton inner iterations.
  std::function<SpMat(const Vec& z, double w0, const Vec& w_eq, const Vec& w_ineq)> lagrangian_hessian;
  Vec lower;  // empty = unbounded
  Vec upper;
  std::optional<VariableLayout> layout;
  ConstraintLayout rows;

  Vec eval_eq(const Vec& z) const { return n_eq > 0 ? eq(z) : Vec(); }
  Vec eval_ineq(const Vec& z) const { return n_ineq > 0 ? ineq(z) : Vec(); }
  SpMat eval_eq_jac(const Vec& z) const { return n_eq > 0 ? eq_jac(z) : SpMat(0, n_vars); }
  SpMat eval_ineq_jac(const Vec& z) const { return n_ineq > 0 ? ineq_jac(z) : SpMat(0, n_vars); }
};

/// Dense Jacobian callback helper for small hand-written programs.
inline std::function<SpMat(const Vec&)> dense_jacobian(std::function<Mat(const Vec&)> jac) {
  return [jac = std::move(jac)](const Vec& z) -> SpMat { return jac(z).sparseView(); };
}

/// Folds finite variable bounds into additional inequality rows (appended after the original ones).
inline NlpProblem fold_bounds(const NlpProblem& nlp) {
  if (nlp.lower.size() == 0 && nlp.upper.size() == 0) return nlp;
  struct Row {
    int var;
    double sign;   // +1: z − u ≤ 0, −1: l − z ≤ 0
    double bound;
  };
  std::vector<Row> extra;
  for (int i = 0; i < nlp.n_vars; ++i) {
    if (nlp.lower.size() > 0 && std::isfinite(nlp.lower[i])) extra.push_back({i, -1.0, nlp.lower[i]});
    if (nlp.upper.size() > 0 && std::isfinite(nlp.upper[i])) extra.push_back({i, 1.0, nlp.upper[i]});
  }
  NlpProblem out = nlp;
  out.lower.resize(0);
  out.upper.resize(0);
  const int base = nlp.n_ineq;
  out.n_ineq = base + static_cast<int>(extra.size());
  out.ineq = [nlp, extra, base](const Vec& z) -> Vec {
    Vec c(base + static_cast<int>(extra.size()));
    if (base > 0) c.head(base) = nlp.ineq(z);
    for (std::size_t k = 0; k < extra.size(); ++k) {
      const auto& r = extra[k];
      c[base + static_cast<int>(k)] = r.sign * (z[r.var] - r.bound);
    }
    return c;
  };
  out.ineq_jac = [nlp, extra, base](const Vec& z) -> SpMat {
    std::vector<Triplet> trip;
    if (base > 0) {
      const SpMat J = nlp.ineq_jac(z);
      for (int k = 0; k < J.outerSize(); ++k)
        for (SpMat::InnerIterator it(J, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    }
    for (std::size_t k = 0; k < extra.size(); ++k) trip.emplace_back(base + static_cast<int>(k), extra[k].var, extra[k].sign);
    SpMat J(base + static_cast<int>(extra.size()), nlp.n_vars);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  };
  if (nlp.lagrangian_hessian) {
    out.lagrangian_hessian = [nlp, base](const Vec& z, double w0, const Vec& we, const Vec& wi) {
      return nlp.lagrangian_hessian(z, w0, we, wi.head(base));
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// Block-structured programs

/// A vector-valued term depending on a few entries of z.
struct Block {
  std::vector<int> vars;
  int rows = 1;
  std::function<Vec(const Vec&)> value;     // local variables → rows
  std::function<Mat(const Vec&)> jacobian;  // rows × vars
};

/// Assembles an NlpProblem from local blocks. The Lagrangian Hessian is obtained by central
/// differences of the weighted local gradients, block by block.
class BlockNlpBuilder {
 public:
  explicit BlockNlpBuilder(int n_vars) : n_vars_(n_vars) {}

  void add_objective(Block b) { objective_.push_back(std::move(b)); }
  int add_eq(Block b) { return push(eq_, eq_rows_, std::move(b)); }
  int add_ineq(Block b) { return push(ineq_, ineq_rows_, std::move(b)); }
  int eq_rows() const { return eq_rows_; }
  int ineq_rows() const { return ineq_rows_; }

  NlpProblem build() const {
    auto obj = std::make_shared<const std::vector<Block>>(objective_);
    auto eq = std::make_shared<const std::vector<Block>>(eq_);
    auto in = std::make_shared<const std::vector<Block>>(ineq_);
    const int nv = n_vars_;
    NlpProblem nlp;
    nlp.n_vars = nv;
    nlp.n_eq = eq_rows_;
    nlp.n_ineq = ineq_rows_;
    nlp.objective = [obj](const Vec& z) {
      double f = 0.0;
      for (const auto& b : *obj) f += b.value(gather(b, z))[0];
      return f;
    };
    nlp.objective_grad = [obj, nv](const Vec& z) -> Vec {
      Vec g = Vec::Zero(nv);
      for (const auto& b : *obj) {
        const Mat J = b.jacobian(gather(b, z));
        for (std::size_t k = 0; k < b.vars.size(); ++k) g[b.vars[k]] += J(0, static_cast<Eigen::Index>(k));
      }
      return g;
    };
    nlp.eq = [eq, rows = eq_rows_](const Vec& z) { return stack(*eq, rows, z); };
    nlp.ineq = [in, rows = ineq_rows_](const Vec& z) { return stack(*in, rows, z); };
    nlp.eq_jac = [eq, rows = eq_rows_, nv](const Vec& z) { return stack_jac(*eq, rows, nv, z); };
    nlp.ineq_jac = [in, rows = ineq_rows_, nv](const Vec& z) { return stack_jac(*in, rows, nv, z); };
    nlp.lagrangian_hessian = [obj, eq, in, nv](const Vec& z, double w0, const Vec& we, const Vec& wi) -> SpMat {
      std::vector<Triplet> trip;
      if (w0 != 0.0) {
        const Vec w = Vec::Constant(1, w0);
        for (const auto& b : *obj) add_block_hessian(b, w, z, trip);
      }
      int row = 0;
      for (const auto& b : *eq) {
        add_block_hessian(b, we.segment(row, b.rows), z, trip);
        row += b.rows;
      }
      row = 0;
      for (const auto& b : *in) {
        add_block_hessian(b, wi.segment(row, b.rows), z, trip);
        row += b.rows;
      }
      SpMat H(nv, nv);
      H.setFromTriplets(trip.begin(), trip.end());
      return H;
    };
    return nlp;
  }

 private:
  static int push(std::vector<Block>& list, int& rows, Block b) {
    const int offset = rows;
    rows += b.rows;
    list.push_back(std::move(b));
    return offset;
  }

  static Vec gather(const Block& b, const Vec& z) {
    Vec local(static_cast<Eigen::Index>(b.vars.size()));
    for (std::size_t k = 0; k < b.vars.size(); ++k) local[static_cast<Eigen::Index>(k)] = z[b.vars[k]];
    return local;
  }

  static Vec stack(const std::vector<Block>& blocks, int rows, const Vec& z) {
    Vec out(rows);
    int row = 0;
    for (const auto& b : blocks) {
      out.segment(row, b.rows) = b.value(gather(b, z));
      row += b.rows;
    }
    return out;
  }

  static SpMat stack_jac(const std::vector<Block>& blocks, int rows, int nv, const Vec& z) {
    std::vector<Triplet> trip;
    int row = 0;
    for (const auto& b : blocks) {
      const Mat J = b.jacobian(gather(b, z));
      for (int r = 0; r < b.rows; ++r)
        for (std::size_t k = 0; k < b.vars.size(); ++k) {
          const double v = J(r, static_cast<Eigen::Index>(k));
          if (v != 0.0) trip.emplace_back(row + r, b.vars[k], v);
        }
      row += b.rows;
    }
    SpMat J(rows, nv);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }

  static void add_block_hessian(const Block& b, const Vec& w, const Vec& z, std::vector<Triplet>& trip) {
    if (w.size() == 0 || w.cwiseAbs().maxCoeff() == 0.0) return;
    const Vec local = gather(b, z);
    const auto weighted_grad = [&](const Vec& y) -> Vec { return b.jacobian(y).transpose() * w; };
    Mat H = fd::jacobian(weighted_grad, local, 1e-6);
    H = 0.5 * (H + H.transpose()).eval();
    for (std::size_t r = 0; r < b.vars.size(); ++r)
      for (std::size_t c = 0; c < b.vars.size(); ++c) {
        const double v = H(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (v != 0.0) trip.emplace_back(b.vars[r], b.vars[c], v);
      }
  }

  int n_vars_;
  std::vector<Block> objective_;
  std::vector<Block> eq_;
  std::vector<Block> ineq_;
  int eq_rows_ = 0;
  int ineq_rows_ = 0;
};

}  // namespace sweep
