#include "sweep/problems.hpp"
#include "sweep/sweep_sim.hpp"
#include "sweep/transcribe.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sweep;
using problems::vec;

namespace {

TranscriptionConfig penalty_cfg(int N, double gamma = 50.0) {
  TranscriptionConfig c;
  c.N = N;
  c.mode = TranscriptionMode::penalty;
  c.gamma = gamma;
  return c;
}

TranscriptionConfig comp_cfg(int N, double eps = 1e-2) {
  TranscriptionConfig c;
  c.N = N;
  c.mode = TranscriptionMode::complementarity;
  c.epsilon = eps;
  return c;
}

/// A problem with n = 2, m = 1 and one initial-set inequality.
ProblemSpec two_by_one() {
  auto p = problems::get("disk-push").spec;
  p.f.control_dim = 1;
  p.f.eval = [](const Vec& x, const Vec& u) { return vec({u[0] - 0.1 * x[1], 0.2 * x[0]}); };
  p.f.jac_x = [](const Vec&, const Vec&) -> Mat { return (Mat(2, 2) << 0.0, -0.1, 0.2, 0.0).finished(); };
  p.f.jac_u = [](const Vec&, const Vec&) -> Mat { return (Mat(2, 1) << 1.0, 0.0).finished(); };
  p.h.eval = [](const Vec& x, const Vec& u) { return u[0] * u[0] + 0.5 * x[0] - 1.0; };
  p.h.grad_x = [](const Vec&, const Vec&) { return vec({0.5, 0.0}); };
  p.h.grad_u = [](const Vec&, const Vec& u) { return vec({2.0 * u[0]}); };
  ScalarField c0;
  c0.dim = 2;
  c0.eval = [](const Vec& x) { return x.squaredNorm() - 0.25; };
  c0.grad = [](const Vec& x) -> Vec { return 2.0 * x; };
  c0.hess = [](const Vec&) -> Mat { return 2.0 * Mat::Identity(2, 2); };
  p.c0 = {c0};
  return p;
}

Vec random_point(const NlpProblem& nlp, std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> d(-half_width, half_width);
  Vec z(nlp.n_vars);
  for (int i = 0; i < nlp.n_vars; ++i) z[i] = d(rng);
  return z;
}

void expect_derivatives_match(const NlpProblem& nlp, const Vec& z, double tol) {
  EXPECT_LE(fd::relative_error(nlp.objective_grad(z), fd::gradient(nlp.objective, z)), tol);
  if (nlp.n_eq > 0) EXPECT_LE(fd::relative_error(Mat(nlp.eq_jac(z)), fd::jacobian(nlp.eq, z)), tol);
  if (nlp.n_ineq > 0) EXPECT_LE(fd::relative_error(Mat(nlp.ineq_jac(z)), fd::jacobian(nlp.ineq, z)), tol);
}

}  // namespace

TEST(Transcribe, PenaltyCounts) {
  const auto nlp = transcribe_penalty(two_by_one(), penalty_cfg(4));
  EXPECT_EQ(nlp.n_vars, 2 * 5 + 1 * 4);
  EXPECT_EQ(nlp.n_eq, 2 * 4);
  EXPECT_EQ(nlp.n_ineq, 4 + 1);
  EXPECT_EQ(nlp.rows.c0, 4);
  EXPECT_EQ(nlp.lower.size(), 0);
}

TEST(Transcribe, ComplementarityCounts) {
  const auto nlp = transcribe_complementarity(two_by_one(), comp_cfg(4));
  EXPECT_EQ(nlp.n_vars, 10 + 4 + 4);
  EXPECT_EQ(nlp.n_eq, 8);
  EXPECT_EQ(nlp.n_ineq, 5 + 4 + 4 + 4 + 4 + 1);
}

TEST(Transcribe, SingletonInitialSetIsPinnedByBounds) {
  const auto p = problems::get("disk-push").spec;
  const auto nlp = transcribe_penalty(p, penalty_cfg(4));
  ASSERT_EQ(nlp.lower.size(), nlp.n_vars);
  EXPECT_EQ(nlp.lower.head(2), p.x0);
  EXPECT_EQ(nlp.upper.head(2), p.x0);
  EXPECT_TRUE(std::isinf(nlp.upper[2]));
}

TEST(Transcribe, DerivativesMatchFiniteDifferencesOnCatalog) {
  std::mt19937_64 rng(17);
  for (const auto& name : problems::list_catalog()) {
    const auto p = problems::get(name).spec;
    const auto pen = transcribe_penalty(p, penalty_cfg(6, 3.0));
    const auto cmp = transcribe_complementarity(p, comp_cfg(6));
    for (int k = 0; k < 10; ++k) {
      SCOPED_TRACE(name);
      expect_derivatives_match(pen, random_point(pen, rng, 0.6), 1e-6);
      expect_derivatives_match(cmp, random_point(cmp, rng, 0.6), 1e-6);
    }
  }
}

TEST(Transcribe, LagrangianHessianMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  const auto p = two_by_one();
  for (const auto& nlp : {transcribe_penalty(p, penalty_cfg(3, 2.0)), transcribe_complementarity(p, comp_cfg(3))}) {
    const Vec z = random_point(nlp, rng, 0.5);
    const Vec we = random_point(nlp, rng, 1.0).head(nlp.n_eq);
    Vec wi = Vec::LinSpaced(nlp.n_ineq, 0.1, 1.0);
    const auto lag_grad = [&](const Vec& y) -> Vec {
      return nlp.objective_grad(y) + nlp.eq_jac(y).transpose() * we + nlp.ineq_jac(y).transpose() * wi;
    };
    const Mat H = Mat(nlp.lagrangian_hessian(z, 1.0, we, wi));
    EXPECT_LE(fd::relative_error(H, fd::jacobian(lag_grad, z)), 1e-6);
  }
}

TEST(Transcribe, RelaxedMixedConstraintArithmetic) {
  auto cfg = penalty_cfg(4);
  cfg.delta = -1.0;
  const auto p = problems::get("interval-1d").spec;  // h = u² − 1
  const auto nlp = transcribe_penalty(p, cfg);
  Vec z = Vec::Zero(nlp.n_vars);
  z[nlp.layout->u(2)] = std::sqrt(1.5);  // h = 0.5
  EXPECT_NEAR(nlp.ineq(z)[nlp.rows.mixed + 2], 1.5, 1e-14);
}

TEST(Transcribe, PenaltyResidualAtIntegratorNodesIsSecondOrder) {
  const auto p = problems::get("disk-push").spec;
  const double gamma = 20.0;
  double prev = 0.0;
  for (int N : {20, 40, 80}) {
    const Grid grid(N);
    const auto ctrl = ControlSignal::constant(grid, vec({1.5, 0.5}));
    const auto fine = simulate_penalty(p, ctrl, gamma, 64);
    const auto nlp = transcribe_penalty(p, penalty_cfg(N, gamma));
    const Vec c = nlp.eq(flatten(*nlp.layout, fine));
    const double r = inf_norm(c);
    EXPECT_LE(r, 15.0 * grid.dt() * grid.dt());
    if (prev > 0.0) EXPECT_LT(r, prev / 3.0);
    prev = r;
  }
}

TEST(Transcribe, ComplementarityResidualAtSlidingSolution) {
  const auto entry = problems::get("interval-1d");
  for (int N : {50, 100, 200}) {
    const Grid grid(N);
    auto tr = problems::sample_reference(*entry.reference, grid);
    std::vector<double> v;
    for (int j = 0; j < N; ++j) v.push_back(grid.t(j) >= 0.5 ? *entry.reference->sliding_slack : 0.0);
    tr.slacks = v;
    const auto nlp = transcribe_complementarity(entry.spec, comp_cfg(N));
    const double r = inf_norm(nlp.eq(flatten(*nlp.layout, tr)));
    EXPECT_LE(r, 2.0 * grid.dt());
  }
}

TEST(Transcribe, InteriorTrajectoryHasZeroComplementarity) {
  const auto entry = problems::get("interior-classical");
  const Grid grid(10);
  auto tr = problems::sample_reference(*entry.reference, grid);
  tr.slacks = std::vector<double>(10, 0.0);
  const double eps = 1e-3;
  const auto nlp = transcribe_complementarity(entry.spec, comp_cfg(10, eps));
  const Vec c = nlp.ineq(flatten(*nlp.layout, tr));
  for (int j = 0; j < 10; ++j) EXPECT_EQ(c[nlp.rows.comp + j] + eps, 0.0);
}

TEST(Transcribe, CatchUpWithProjectionSlacksApproachesFeasibility) {
  // The ellipse normal turns along the contact arc, so the explicit-Euler normal lags the projection.
  const auto p = problems::get("ellipse-steer").spec;
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {50, 100, 200}) {
    const Grid grid(N);
    const auto ctrl = ControlSignal::constant(grid, vec({0.5, 1.5}));
    auto tr = simulate_catchup(p, ctrl);
    std::vector<double> v;
    for (int j = 0; j < N; ++j) {
      const Vec r = tr.states[j] + grid.dt() * p.f.eval(tr.states[j], ctrl.values[j]) - tr.states[j + 1];
      const Vec gp = p.psi.grad(tr.states[j + 1]);
      v.push_back(r.dot(gp) / gp.squaredNorm() / grid.dt());
    }
    tr.slacks = v;
    auto cfg = comp_cfg(N, 0.0);
    const auto nlp = transcribe_complementarity(p, cfg);
    const Vec z = flatten(*nlp.layout, tr);
    const Vec c = nlp.ineq(z);
    const double viol = std::max({inf_norm(nlp.eq(z)), c.segment(nlp.rows.psi, N + 1).cwiseMax(0.0).maxCoeff(),
                                  c.segment(nlp.rows.nonneg, N).cwiseMax(0.0).maxCoeff(),
                                  c.segment(nlp.rows.comp, N).cwiseMax(0.0).maxCoeff()});
    EXPECT_GT(viol, 0.0);
    EXPECT_LT(viol, prev);
    prev = viol;
  }
  EXPECT_LE(prev, 0.05);
}

TEST(Transcribe, RoundTripIsExact) {
  std::mt19937_64 rng(9);
  for (const auto& nlp : {transcribe_penalty(two_by_one(), penalty_cfg(5)),
                          transcribe_complementarity(two_by_one(), comp_cfg(5))}) {
    const Vec z = random_point(nlp, rng, 3.0);
    EXPECT_EQ(flatten(*nlp.layout, extract_trajectory(nlp, z)), z);
  }
}

TEST(Transcribe, SlacksPresentOnlyInComplementarityMode) {
  const auto p = problems::get("interval-1d").spec;
  const auto pen = transcribe_penalty(p, penalty_cfg(4));
  const auto cmp = transcribe_complementarity(p, comp_cfg(4));
  EXPECT_FALSE(extract_trajectory(pen, Vec::Zero(pen.n_vars)).slacks.has_value());
  const auto tr = extract_trajectory(cmp, Vec::Constant(cmp.n_vars, 0.25));
  ASSERT_TRUE(tr.slacks.has_value());
  for (double v : *tr.slacks) EXPECT_GE(v, -1e-12);
}

TEST(Transcribe, ErrorsAndLayoutDump) {
  const auto p = problems::get("interval-1d").spec;
  const auto nlp = transcribe_penalty(p, penalty_cfg(4));
  EXPECT_THROW(extract_trajectory(nlp, Vec::Zero(3)), DimensionMismatchError);
  EXPECT_THROW(transcribe_penalty(p, penalty_cfg(1)), InvalidArgumentError);
  EXPECT_THROW(transcribe_penalty(p, comp_cfg(4)), InvalidArgumentError);
  auto bad = p;
  bad.x0 = vec({0.1, 0.2});
  EXPECT_THROW(transcribe_penalty(bad, penalty_cfg(4)), DimensionMismatchError);
  const auto j = layout_json(nlp);
  EXPECT_EQ(j["n_vars"], 9);
  EXPECT_EQ(j["rows"]["mixed"], 0);
}
