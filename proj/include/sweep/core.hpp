#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sweep {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

/// Raised when a callback produced NaN or an infinity. Carries the probe point.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, Vec where)
      : Error(what), point_(std::move(where)) {}
  const Vec& point() const { return point_; }

 private:
  Vec point_;
};

/// |ψ(x)| within tolerance but ∇ψ(x) vanishes, so the boundary normal is undefined.
class DegenerateGradientError : public Error {
 public:
  using Error::Error;
};

/// Iterative routine gave up. `last_iterate` holds whatever it had at that point.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, Vec last, double residual)
      : Error(what), last_(std::move(last)), residual_(residual) {}
  const Vec& last_iterate() const { return last_; }
  double residual() const { return residual_; }

 private:
  Vec last_;
  double residual_;
};

class NewtonDivergenceError : public Error {
 public:
  NewtonDivergenceError(const std::string& what, double gamma, int step, double residual)
      : Error(what), gamma_(gamma), step_(step), residual_(residual) {}
  double gamma() const { return gamma_; }
  int step() const { return step_; }
  double residual() const { return residual_; }

 private:
  double gamma_;
  int step_;
  double residual_;
};

class NotConvergedError : public Error {
 public:
  using Error::Error;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Vec& v, const char* what, const Vec& where) {
  if (!v.allFinite()) throw NonFiniteError(std::string(what) + " returned a non-finite value", where);
}

inline void require_finite(double v, const char* what, const Vec& where) {
  if (!std::isfinite(v)) throw NonFiniteError(std::string(what) + " returned a non-finite value", where);
}

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want)
    throw DimensionMismatchError(std::string(what) + ": expected dimension " + std::to_string(want) +
                                 ", got " + std::to_string(got));
}

inline double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace sweep
