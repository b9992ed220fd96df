#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <g2soliton/domain.hpp>

using namespace g2s;

namespace {

// Closed-form steady soliton at t = ln 2: f^2 = (1/2, 3, 3/2), tau = (1/6, 4, -5/2).
PhasePoint steady_ln2() {
  return {std::log(2.0), {std::sqrt(0.5), std::sqrt(3.0), std::sqrt(1.5)}, {1.0 / 6.0, 4.0, -2.5}};
}

}  // namespace

TEST(Domain, ConstraintResidual) {
  EXPECT_EQ(constraint_residual({0, {1, 1, 1}, {0, 0, 0}}), 0.0);
  EXPECT_NEAR(constraint_residual(steady_ln2()), 0.0, 1e-15);
  EXPECT_EQ(constraint_residual({0, {1, 1, 1}, {1, 1, 1}}), 3.0);
  EXPECT_THROW(constraint_residual({0, {0, 1, 1}, {0, 0, 0}}), DomainError);
}

TEST(Domain, RecoverU) {
  EXPECT_NEAR(recover_u({0, {1, 1, 1}, {0, 0, 0}}, -1.0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(recover_u(steady_ln2(), 0.0), 1.0 / 3.0, 1e-15);
  const double s2 = std::sqrt(2.0);
  EXPECT_NEAR(recover_u({2, {2, s2, s2}, {4, -1, -1}}, -9.0 / 4.0), 2.5, 1e-14);
}

TEST(Domain, ObservablesAtExplicitSteadyPoint) {
  auto o = observables(steady_ln2(), 0.0);
  EXPECT_NEAR(o.normTauSq, 14.0 / 3.0, 1e-14);
  EXPECT_NEAR(o.scalarCurvature, -7.0 / 3.0, 1e-14);
  EXPECT_NEAR(o.S[0], -4.25, 1e-14);
  EXPECT_NEAR(o.S[1], 1.0, 1e-14);
  EXPECT_NEAR(o.S[2], 3.25, 1e-14);
  EXPECT_NEAR(o.S[0] + o.S[1] + o.S[2], 0.0, 1e-14);
  EXPECT_NEAR(o.E[0] + o.E[1] + o.E[2], 0.0, 1e-14);
  EXPECT_NEAR(o.clResidual, 0.0, 1e-14);
  EXPECT_NEAR(o.fbar2, 5.0, 1e-14);
  EXPECT_NEAR(o.volume, 1.5, 1e-14);
  // Lambda = 1/f2^2 + 1/f3^2 = 1 and D = F2 - F3 = 1 on this solution.
  EXPECT_NEAR(o.Lambda, 1.0, 1e-14);
  EXPECT_NEAR(o.D, 1.0, 1e-14);
}

TEST(Domain, ObservablesTorsionFreeAndExternalU) {
  auto o = observables({0, {1, 2, 3}, {0, 0, 0}}, 0.0);
  EXPECT_EQ(o.normTauSq, 0.0);
  EXPECT_EQ(o.scalarCurvature, 0.0);
  auto e = observables(steady_ln2(), 0.0, 0.5);
  EXPECT_NEAR(e.clResidual, -(0.5 - 1.0 / 3.0) * 5.0, 1e-14);
}

TEST(Domain, ObservablesLargeTimeLimit) {
  const double t = 40.0;
  PhasePoint p{t,
               {2 * std::sinh(t / 2), std::sqrt(1 + std::exp(t)), std::sqrt(1 + std::exp(-t))},
               {4 * std::tanh(t / 2) * std::pow(std::sinh(t / 2), 2), 2 + std::exp(t), -(2 + std::exp(-t))}};
  auto o = observables(p, 0.0);
  EXPECT_NEAR(o.normTauSq, 6.0, 1e-8);
  EXPECT_NEAR(o.scalarCurvature, -3.0, 1e-8);
}

TEST(Domain, ScalarCurvatureNonPositive) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uf(0.1, 3.0), ut(-3.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    PhasePoint p{0, {uf(rng), uf(rng), uf(rng)}, {ut(rng), ut(rng), ut(rng)}};
    EXPECT_LE(observables(p, 0.3).scalarCurvature, 0.0);
  }
}

TEST(Domain, ScaleInvariant) {
  auto s = to_scale_invariant({0, {2, 2, 2}, {0, 0, 0}});
  EXPECT_DOUBLE_EQ(s.g, 2.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(s.F[i], 1.0);
    EXPECT_EQ(s.T[i], 0.0);
  }
  auto p = steady_ln2();
  auto q = to_scale_invariant(p);
  EXPECT_NEAR(q.g, std::cbrt(1.5), 1e-15);
  EXPECT_NEAR(q.F[0] * q.F[1] * q.F[2], 1.0, 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q.F[i], p.f[i] / std::cbrt(1.5), 1e-15);
  double sum = 0;
  for (int i = 0; i < 3; ++i) sum += q.T[i] / (q.F[i] * q.F[i]);
  EXPECT_NEAR(sum, 0.0, 1e-14);
  auto r = from_scale_invariant(q, p.t);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(r.f[i], p.f[i], 1e-15 * p.f[i]);
    EXPECT_NEAR(r.tau[i], p.tau[i], 1e-15 * std::abs(p.tau[i]));
  }
}

TEST(Domain, PolyVariables) {
  auto F = to_poly(Vec3{1, 1, 1}).F;
  for (double x : F) EXPECT_DOUBLE_EQ(x, 1.0);
  auto G = to_poly(steady_ln2()).F;
  EXPECT_NEAR(G[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(G[1], 2.0, 1e-15);
  EXPECT_NEAR(G[2], 1.0, 1e-15);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.05, 20.0);
  for (int k = 0; k < 100; ++k) {
    Vec3 f{u(rng), u(rng), u(rng)};
    auto back = from_poly(to_poly(f));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back[i], f[i], 1e-14 * f[i]);
  }
  EXPECT_THROW(from_poly(PolyPoint{{1, 1, 0}}), DomainError);
}

TEST(Domain, Rescale) {
  PhasePoint p{0.7, {1, 2, 3}, {0.1, -0.2, 0.3}};
  auto id = rescale(p, 1.0, 0.4);
  EXPECT_EQ(id.lambda, 0.4);
  EXPECT_EQ(id.point.f, p.f);
  EXPECT_EQ(id.point.tau, p.tau);
  auto r = rescale(PhasePoint{1, {1, 1, 1}, {0, 0, 0}}, 2.0, -1.0);
  for (double x : r.point.f) EXPECT_EQ(x, 2.0);
  EXPECT_EQ(r.lambda, -0.25);
  EXPECT_EQ(r.point.t, 2.0);
  EXPECT_THROW(rescale(p, 0.0, 1.0), DomainError);
  auto cp = rescale(ClosureParams{-9.0 / 4.0, 1.0, 0.0}, 3.0);
  EXPECT_DOUBLE_EQ(cp.lambda, -0.25);
  EXPECT_DOUBLE_EQ(cp.b, 3.0);
}
