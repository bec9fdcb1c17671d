#include "sweep/model.hpp"
#include "sweep/problems.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sweep;
using problems::vec;

namespace {

ProblemSpec disk_with_psi(ScalarField psi) {
  ProblemSpec p = problems::get("disk-push").spec;
  p.psi = std::move(psi);
  return p;
}

ProblemSpec scalar_h_problem(MixedConstraint h) {
  ProblemSpec p = problems::get("interval-1d").spec;
  p.h = std::move(h);
  return p;
}

StateTrajectory constant_trajectory(int N, const Vec& x, const Vec& u) {
  Grid grid(N);
  return {grid, std::vector<Vec>(N + 1, x), std::vector<Vec>(N, u), std::nullopt};
}

}  // namespace

TEST(NormalRay, BoundaryPointOfDiskHasRadialGenerator) {
  const auto p = problems::get("disk-push").spec;
  const auto r = normal_ray(p, vec({1.0, 0.0}), 1e-9);
  ASSERT_EQ(r.kind, NormalRay::Kind::boundary);
  EXPECT_NEAR(r.generator[0], 2.0, 1e-15);
  EXPECT_NEAR(r.generator[1], 0.0, 1e-15);
}

TEST(NormalRay, InteriorAndOutside) {
  const auto p = problems::get("disk-push").spec;
  EXPECT_EQ(normal_ray(p, vec({0.0, 0.0}), 1e-9).kind, NormalRay::Kind::interior);
  EXPECT_EQ(normal_ray(p, vec({2.0, 0.0}), 1e-9).kind, NormalRay::Kind::outside);
  EXPECT_THROW(normal_ray(p, vec({2.0, 0.0}), 0.0), InvalidArgumentError);
}

TEST(NormalRay, VanishingGradientOnBoundaryIsAnError) {
  ScalarField psi;
  psi.dim = 2;
  psi.eval = [](const Vec& x) { return x[0] * x[0]; };
  psi.grad = [](const Vec& x) { return vec({2.0 * x[0], 0.0}); };
  psi.hess = [](const Vec&) -> Mat { return Mat(vec({2.0, 0.0}).asDiagonal()); };
  const auto p = disk_with_psi(psi);
  EXPECT_THROW(normal_ray(p, vec({0.0, 0.3}), 1e-9), DegenerateGradientError);
}

TEST(NormalRay, ClassificationMatchesRadialBand) {
  const auto p = problems::get("disk-push").spec;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(0.999, 1.001);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  const double tol = 1e-4;
  for (int k = 0; k < 500; ++k) {
    const double r = radius(rng);
    const double a = angle(rng);
    const Vec x = vec({r * std::cos(a), r * std::sin(a)});
    const bool in_band = std::abs(r * r - 1.0) <= tol;
    EXPECT_EQ(normal_ray(p, x, tol).kind == NormalRay::Kind::boundary, in_band);
  }
}

TEST(CheckAssumptions, DiskPushBoundsAndConvexity) {
  const auto p = problems::get("disk-push").spec;
  const auto rep = check_assumptions(p, 1000, 1);
  EXPECT_GE(rep.M_est, 1.9);
  EXPECT_LE(rep.M_est, 2.0);
  EXPECT_TRUE(rep.convexity_ok);
  EXPECT_NEAR(rep.eta_est, 1.0, 1e-9);
  EXPECT_TRUE(rep.clean());
  EXPECT_NEAR(rep.min_gamma(), 2.0 * rep.M_est / rep.eta_est, 1e-15);
}

TEST(CheckAssumptions, MSampleDominatesEveryDrawnDrift) {
  // |f(x, u)| = |u| ≤ 2 on Ω(x) for disk-push; the estimate never exceeds the true bound.
  const auto p = problems::get("disk-push").spec;
  for (std::uint64_t seed : {1u, 2u, 3u}) EXPECT_LE(check_assumptions(p, 200, seed).M_est, 2.0);
}

TEST(CheckAssumptions, NonCoercivePsiIsReported) {
  ScalarField psi;
  psi.dim = 2;
  psi.eval = [](const Vec& x) { return x[0] - 1.0; };
  psi.grad = [](const Vec&) { return vec({1.0, 0.0}); };
  psi.hess = [](const Vec&) -> Mat { return Mat::Zero(2, 2); };
  const auto rep = check_assumptions(disk_with_psi(psi), 200, 3);
  EXPECT_FALSE(rep.coercivity_ok);
  const bool found = std::any_of(rep.violations.begin(), rep.violations.end(),
                                 [](const Violation& v) { return v.assumption == "H3-coercivity"; });
  EXPECT_TRUE(found);
}

TEST(CheckAssumptions, DeterministicUnderSeed) {
  const auto p = problems::get("ellipse-steer").spec;
  const auto a = check_assumptions(p, 300, 42);
  const auto b = check_assumptions(p, 300, 42);
  EXPECT_EQ(a.M_est, b.M_est);
  EXPECT_EQ(a.eta_est, b.eta_est);
  EXPECT_EQ(a.violations.size(), b.violations.size());
  EXPECT_EQ(a.h_sup, b.h_sup);
}

TEST(CheckAssumptions, RejectsSmallBudget) {
  EXPECT_THROW(check_assumptions(problems::get("disk-push").spec, 99, 0), InvalidArgumentError);
}

TEST(CheckAssumptions, InitialSetOutsideSweepingSet) {
  auto p = problems::get("interval-1d").spec;
  p.x0 = vec({1.5});
  const auto rep = check_assumptions(p, 100, 0);
  EXPECT_FALSE(rep.c0_subset_ok);
}

TEST(GradientCheck, PolynomialPsiIsExactToRoundoff) {
  const auto psi = problems::ball_unscaled(2, 1.0);
  const Vec x = vec({1.0, 2.0});
  EXPECT_LE(fd::relative_error(psi.grad(x), fd::gradient(psi.eval, x)), 1e-8);
  EXPECT_DOUBLE_EQ(psi.grad(x)[1], 4.0);
}

TEST(GradientCheck, IdentityDriftJacobian) {
  const auto f = problems::identity_drift(3);
  const Vec x = vec({0.1, 0.2, 0.3});
  const Vec u = vec({-1.0, 0.5, 2.0});
  const Mat J = fd::jacobian([&](const Vec& w) { return f.eval(x, w); }, u);
  EXPECT_LE(fd::relative_error(f.jac_u(x, u), J), 1e-8);
}

TEST(GradientCheck, CatalogPassesAtHundredPoints) {
  for (const auto& name : problems::list_catalog()) {
    const auto rep = gradient_check(problems::get(name).spec, 100, 11);
    EXPECT_LE(rep.worst(), 1e-6) << name << " worst field " << rep.worst_field();
  }
}

TEST(GradientCheck, InjectedDefectIsDetected) {
  auto p = problems::get("disk-push").spec;
  p.psi.grad = [](const Vec& x) -> Vec { return 1.1 * 2.0 * x; };
  const auto rep = gradient_check(p, 20, 5);
  EXPECT_GE(rep.get("psi_grad"), 0.05);
  EXPECT_EQ(rep.worst_field(), "psi_grad");
}

TEST(GradientCheck, NonFiniteEvaluationThrows) {
  auto p = problems::get("disk-push").spec;
  p.g.eval = [](const Vec&) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(gradient_check(p, 3, 1), NonFiniteError);
}

TEST(RegularityMargin, ActiveUnitControl) {
  const auto p = problems::get("interval-1d").spec;  // h = u² − 1
  const auto r = regularity_margin(p, constant_trajectory(10, vec({0.5}), vec({1.0})), 1e-9);
  ASSERT_TRUE(r.margin.has_value());
  EXPECT_DOUBLE_EQ(*r.margin, 2.0);
  EXPECT_EQ(r.active_count, 10);
  EXPECT_TRUE(r.regular());
}

TEST(RegularityMargin, DegenerateSquareConstraint) {
  MixedConstraint h;
  h.eval = [](const Vec&, const Vec& u) { return u.squaredNorm(); };
  h.grad_x = [](const Vec&, const Vec&) { return vec({0.0}); };
  h.grad_u = [](const Vec&, const Vec& u) -> Vec { return 2.0 * u; };
  const auto r = regularity_margin(scalar_h_problem(h), constant_trajectory(5, vec({0.0}), vec({0.0})));
  ASSERT_TRUE(r.margin.has_value());
  EXPECT_LT(*r.margin, 1e-6);
  EXPECT_FALSE(r.regular());
}

TEST(RegularityMargin, InactiveTrajectoryHasNoMargin) {
  const auto p = problems::get("interval-1d").spec;
  const auto r = regularity_margin(p, constant_trajectory(8, vec({0.0}), vec({std::sqrt(0.5)})));
  EXPECT_FALSE(r.margin.has_value());
  EXPECT_EQ(r.active_count, 0);
}

TEST(RegularityMargin, DimensionMismatch) {
  const auto p = problems::get("interval-1d").spec;
  EXPECT_THROW(regularity_margin(p, constant_trajectory(4, vec({0.0, 0.0}), vec({0.0}))), DimensionMismatchError);
}

TEST(ProblemSpec, ValidateRejectsExteriorOrigin) {
  auto p = problems::get("disk-push").spec;
  EXPECT_NO_THROW(p.validate());
  p.psi = problems::linear(vec({1.0, 0.0}));
  p.psi.hess = [](const Vec&) -> Mat { return Mat::Zero(2, 2); };
  EXPECT_THROW(p.validate(), InvalidArgumentError);
}
