#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <random>

#include <g2soliton/analysis.hpp>
#include <g2soliton/quad.hpp>

using namespace g2s;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Vec3 steady_f(double t) { return {2 * std::sinh(t / 2), std::sqrt(1 + std::exp(t)), std::sqrt(1 + std::exp(-t))}; }
Vec3 steady_tau(double t) {
  const double sh = std::sinh(t / 2);
  return {4 * std::tanh(t / 2) * sh * sh, 2 + std::exp(t), -(2 + std::exp(-t))};
}

SolveOptions seeded_at(double t0, double t_max) {
  SolveOptions o;
  o.order = 12;
  o.t0 = t0;
  o.integrator.t_max = t_max;
  return o;
}

// Synthetic run whose cone deviation is exactly a t^rate.
Trajectory synthetic_decay(double a, double rate, double t_lo, double t_hi, int n) {
  Trajectory tr;
  tr.lambda = 1.0;
  for (int k = 0; k < n; ++k) {
    const double t = t_lo * std::pow(t_hi / t_lo, double(k) / (n - 1));
    const double e = a * std::pow(t, rate) / kSqrt2;
    Sample s;
    s.p = {t, {t, t, t}, {e * t, -e * t, 0.0}};
    tr.samples.push_back(s);
  }
  return tr;
}

}  // namespace

TEST(Integrate, ExplicitSteadyFromSeed) {
  auto tr = solve_closure({0.0, kSqrt2, 3.0}, seeded_at(0.1, 10.0));
  EXPECT_EQ(tr.termination, Termination::ReachedTmax);
  EXPECT_NEAR(tr.t_end(), 10.0, 1e-12);
  for (const auto& s : tr.samples) {
    auto f = steady_f(s.p.t);
    auto tau = steady_tau(s.p.t);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(s.p.f[i], f[i], 1e-6 * std::max(1.0, f[i]));
      EXPECT_NEAR(s.p.tau[i], tau[i], 1e-6 * std::max(1.0, std::abs(tau[i])));
    }
  }
  ASSERT_EQ(tr.count(EventKind::F1EqualsF3), 1u);
  for (const auto& e : tr.events)
    if (e.kind == EventKind::F1EqualsF3) EXPECT_NEAR(e.t, std::log(3.0), 1e-6);
}

void expect_shrinker(const Trajectory& tr, double b, double tol) {
  for (const auto& s : tr.samples) {
    const double t = s.p.t, q = b * b + t * t / 4;
    const Vec3 f{t, std::sqrt(q), std::sqrt(q)};
    const Vec3 tau{t * t * t / q, -t / 2, -t / 2};
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(s.p.f[i], f[i], tol * std::max(1.0, f[i])) << "t=" << t;
      EXPECT_NEAR(s.p.tau[i], tau[i], tol * std::max(1.0, std::abs(tau[i]))) << "t=" << t;
    }
  }
}

TEST(Integrate, ExplicitShrinkerFromSeedQuad) {
  SolveOptions opt = seeded_at(0.1, 10.0);
  opt.order = 30;  // truncation below 1e-28 at t0
  auto tr = solve_closure_quad({-2.25, 1.0, 0.0}, opt);
  EXPECT_EQ(tr.termination, Termination::ReachedTmax);
  EXPECT_DOUBLE_EQ(tr.t_end(), 10.0);
  expect_shrinker(tr, 1.0, 1e-6);
}

TEST(Integrate, ExplicitShrinkerWideOrbitExtended) {
  auto tr = solve_closure({-9.0 / 16, 2.0, 0.0}, seeded_at(0.1, 10.0));
  EXPECT_EQ(tr.termination, Termination::ReachedTmax);
  expect_shrinker(tr, 2.0, 1e-6);
}

TEST(Integrate, ShrinkerPerturbationGrowth) {
  // Deviations from the b = 1 shrinker grow like exp(3 t^2 / 8): extended precision
  // loses the solution before t = 10, binary128 holds it.
  auto ext = solve_closure({-2.25, 1.0, 0.0}, seeded_at(0.1, 10.0));
  const double t = ext.t_end();
  const double dev = ext.termination == Termination::ReachedTmax ? std::abs(ext.samples.back().p.f[1] - std::sqrt(26.0))
                                                                  : 1.0;
  EXPECT_GT(dev, 1e-7) << "t_end=" << t;
  SolveOptions opt = seeded_at(0.1, 10.0);
  opt.order = 30;
  auto quad = solve_closure_quad({-2.25, 1.0, 0.0}, opt);
  EXPECT_LT(std::abs(quad.samples.back().p.f[1] - std::sqrt(26.0)), 1e-12);
}

TEST(Integrate, QuadMatchesExtendedOnStableRun) {
  SolveOptions opt = seeded_at(0.1, 5.0);
  opt.integrator.record_steps = false;
  opt.integrator.output_times = {1, 2, 3, 4, 5};
  auto a = solve_closure({0.4, 1.3, 1.1}, opt);
  auto q = solve_closure_quad({0.4, 1.3, 1.1}, opt);
  ASSERT_EQ(a.samples.size(), q.samples.size());
  for (std::size_t k = 1; k < a.samples.size(); ++k)
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.samples[k].p.f[i], q.samples[k].p.f[i], 1e-9 * q.samples[k].p.f[i]);
}

TEST(Integrate, BlowUpEvent) {
  auto tr = solve_closure({0.0, 1.0, 3.0});
  EXPECT_EQ(tr.termination, Termination::BlowUp);
  ASSERT_GE(tr.count(EventKind::BlowUp), 1u);
  EXPECT_EQ(tr.events.back().kind, EventKind::BlowUp);
  EXPECT_EQ(tr.events.back().component, 2);
  EXPECT_TRUE(std::isfinite(tr.events.back().t));
  EXPECT_LE(tr.samples.back().p.f[2], 1e-6 * 1.0 * (1 + 1e-9));
  EXPECT_LT(tr.samples.back().d.df[2], 0.0);
}

TEST(Integrate, DenseOutputAgreesWithRhs) {
  IntegratorConfig cfg;
  cfg.t_max = 3.0;
  const double h = 1e-3;
  for (int k = 0; k <= 40; ++k) cfg.output_times.push_back(2.0 + h * k);
  SolveOptions opt;
  opt.integrator = cfg;
  auto tr = solve_closure({0.4, 1.3, 1.1}, opt);
  std::vector<PhasePoint> w;
  for (double t : cfg.output_times)
    for (const auto& s : tr.samples)
      if (std::abs(s.p.t - t) < 1e-12) {
        w.push_back(s.p);
        break;
      }
  ASSERT_EQ(w.size(), cfg.output_times.size());
  for (std::size_t k = 2; k + 2 < w.size(); ++k) {
    auto rhs = rhs_su3(w[k], 0.4);
    for (int i = 0; i < 3; ++i) {
      auto stencil = [&](auto get) {
        return (get(w[k - 2]) - 8 * get(w[k - 1]) + 8 * get(w[k + 1]) - get(w[k + 2])) / (12 * h);
      };
      const double df = stencil([i](const PhasePoint& p) { return p.f[i]; });
      const double dtau = stencil([i](const PhasePoint& p) { return p.tau[i]; });
      EXPECT_NEAR(df, rhs.df[i], 1e-6 * std::max(1.0, std::abs(rhs.df[i])));
      EXPECT_NEAR(dtau, rhs.dtau[i], 1e-6 * std::max(1.0, std::abs(rhs.dtau[i])));
    }
  }
  auto mixed = mixed_order_residual(w, 0.4);
  for (double x : mixed.tau) EXPECT_LE(x, 1e-6);
  EXPECT_LE(mixed.closure, 1e-6);
}

TEST(Integrate, InterpolationBetweenSteps) {
  auto tr = solve_closure({0.0, kSqrt2, 3.0}, seeded_at(0.1, 6.0));
  for (double t : {0.37, 1.234, 4.9}) {
    auto p = tr.interpolate(t);
    auto f = steady_f(t);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p.f[i], f[i], 1e-5 * std::max(1.0, f[i]));
  }
  EXPECT_THROW(tr.interpolate(7.0), DomainError);
}

TEST(Integrate, SteadyConservedQuantities) {
  const double c = 1.7;
  auto tr = solve_closure({0.0, 1.1, c}, seeded_at(0.05, 50.0));
  for (const auto& s : tr.samples) {
    const double u = s.obs.u;
    const Vec3 expect{0.0, c, -c};
    for (int i = 0; i < 3; ++i) {
      const double scale = std::abs(s.p.tau[i]) + std::abs(u) * sqr(s.p.f[i]);
      EXPECT_NEAR(s.p.tau[i] - u * sqr(s.p.f[i]), expect[i], 1e-8 * std::max(1.0, scale));
    }
    EXPECT_LE(std::abs(relative_constraint_residual(s.p)), 1e-8);
  }
}

TEST(Classify, AnalyticClass) {
  EXPECT_EQ(analytic_steady_class(1.0, 3.0), EndKind::Incomplete);
  EXPECT_EQ(analytic_steady_class(2.0, 3.0), EndKind::CompleteAC);
  EXPECT_EQ(analytic_steady_class(kSqrt2, 3.0), EndKind::CompleteExponentialEnd);
  EXPECT_EQ(analytic_steady_class(1.0, 0.0), EndKind::CompleteAC);
  EXPECT_EQ(analytic_steady_class(1.0, -3.0), EndKind::Incomplete);
}

TEST(Classify, SteadyGrid) {
  auto rows = classify_steady_params({{1.0, 3.0}, {1.2, 3.0}, {kSqrt2, 3.0}, {1.6, 3.0}, {2.0, 3.0}, {1.0, 0.0}});
  ASSERT_EQ(rows.size(), 6u);
  const EndKind expect[] = {EndKind::Incomplete, EndKind::Incomplete, EndKind::CompleteExponentialEnd,
                            EndKind::CompleteAC, EndKind::CompleteAC, EndKind::CompleteAC};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].numerical.kind, expect[k]) << "b = " << rows[k].b;
    EXPECT_TRUE(rows[k].agree);
  }
  EXPECT_TRUE(std::isfinite(rows[0].numerical.blowup_time));
  EXPECT_NEAR(rows[3].numerical.rate, -1.0, 0.1);
  EXPECT_NEAR(rows[4].numerical.rate, -1.0, 0.1);
  EXPECT_NEAR(rows[5].numerical.rate, -4.0, 0.4);
  EXPECT_THROW(classify_steady_params({}), DomainError);
}

TEST(Classify, NegativeCMirrorsPositive) {
  auto a = classify_steady(1.0, -3.0);
  EXPECT_EQ(a.kind, EndKind::Incomplete);
  auto b = classify_steady(kSqrt2, -3.0);
  EXPECT_EQ(b.kind, EndKind::CompleteExponentialEnd);
}

TEST(Classify, EmptyTrajectoryIsUndetermined) {
  Trajectory tr;
  auto k = classify_end(tr);
  EXPECT_EQ(k.kind, EndKind::Undetermined);
  EXPECT_FALSE(k.reason.empty());
}

TEST(Classify, FitRateOnSyntheticDecay) {
  auto fit = fit_rate(synthetic_decay(0.01, -2.0, 1.0, 1e3, 200));
  EXPECT_NEAR(fit.rate, -2.0, 0.01);
  EXPECT_GE(fit.n, 4u);
  auto k = classify_end(synthetic_decay(0.01, -2.0, 1.0, 1e3, 200));
  EXPECT_EQ(k.kind, EndKind::CompleteAC);
  EXPECT_NEAR(k.rate, -2.0, 0.01);
}

TEST(Classify, FitRateNeedsTail) {
  EXPECT_THROW(fit_rate(synthetic_decay(0.01, -2.0, 1.0, 1.2, 3)), InsufficientData);
  EXPECT_THROW(fit_rate(synthetic_decay(10.0, 0.0, 1.0, 100.0, 50)), InsufficientData);
}

TEST(Boundary, FindsBInB) {
  auto r = find_boundary_b(3.0, 1.2, 1.6, 1e-3);
  EXPECT_NEAR(r.estimate, kSqrt2, 1e-3);
  EXPECT_NEAR(r.reference, kSqrt2, 1e-15);
  EXPECT_LE(r.hi - r.lo, 1e-3);
  EXPECT_GT(r.probes, 2);
}

TEST(Boundary, FindsC) {
  auto r = find_boundary_c(1.0, 1.5, 2.5, 1e-3);
  EXPECT_NEAR(r.estimate, 3.0 / kSqrt2, 1e-3);
}

TEST(Boundary, Errors) {
  EXPECT_THROW(find_boundary_b(3.0, 1.6, 2.0), NotBracketed);
  EXPECT_THROW(find_boundary_b(3.0, 1.6, 1.2), DomainError);
}

TEST(Spectra, PolyFixedPoints) {
  auto fps = poly_fixed_points(3.0);
  ASSERT_EQ(fps.size(), 2u);
  const auto& o = fps[0];
  EXPECT_EQ(o.point, (Vec3{0, 0, 0}));
  EXPECT_EQ(o.kind, "degenerate");
  const auto& e = fps[1];
  EXPECT_NEAR(e.point[0], 1.0, 1e-15);
  EXPECT_NEAR(e.point[1], 1.0, 1e-15);
  EXPECT_NEAR(e.point[2], 0.0, 1e-15);
  EXPECT_LE(e.rhs_residual, 1e-12);
  EXPECT_EQ(e.kind, "saddle");
  EXPECT_NEAR(e.eigenvalues[0].real(), 1.0, 1e-10);
  EXPECT_NEAR(e.eigenvalues[1].real(), -1.0, 1e-10);
  EXPECT_NEAR(e.eigenvalues[2].real(), -2.0, 1e-10);
  ASSERT_TRUE(e.stable_plane_normal.has_value());
  for (double x : *e.stable_plane_normal) EXPECT_NEAR(x, 1.0 / std::sqrt(3.0), 1e-10);
  // The normal annihilates both stable eigenvectors.
  Eigen::Vector3d n((*e.stable_plane_normal)[0], (*e.stable_plane_normal)[1], (*e.stable_plane_normal)[2]);
  for (int k = 1; k < 3; ++k) EXPECT_NEAR(std::abs(n.dot(e.eigenvectors.col(k).real())), 0.0, 1e-10);
  EXPECT_EQ(poly_fixed_points(0.0).size(), 1u);
}

TEST(Spectra, PolyJacobianMatchesFiniteDifference) {
  const Vec3 F{0.7, 1.3, 0.4};
  auto J = poly_jacobian(F, 2.0);
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Vec3 a = F, b = F;
    a[j] += h;
    b[j] -= h;
    auto fa = rhs_steady_poly<double>(a, 2.0), fb = rhs_steady_poly<double>(b, 2.0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(J(i, j), (fa[i] - fb[i]) / (2 * h), 1e-8);
  }
}

TEST(Spectra, Cone) {
  auto r = cone_linearization();
  ASSERT_EQ(r.eigenvalues.size(), 4u);
  EXPECT_NEAR(r.eigenvalues[0], -2.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues[1], -2.0, 1e-12);
  EXPECT_NEAR(r.eigenvalues[2], -0.5, 1e-12);
  EXPECT_NEAR(r.eigenvalues[3], -0.5, 1e-12);
  for (int k = 0; k < 2; ++k)
    for (int i = 3; i < 6; ++i) EXPECT_NEAR(r.eigenvectors(i, k), 0.0, 1e-12);
  std::array<double, 6> y{1, 1, 1, 0, 0, 0};
  for (double x : rhs_steady_normalized_s<double>(y)) EXPECT_LE(std::abs(x), 1e-14);
}

TEST(Scaling, IdentityAndSteady) {
  auto seed = seed_point(build_series({0.0, 1.0, 1.0}), 0.05);
  EXPECT_EQ(check_scaling_symmetry(seed, 0.0, 1.0, 10.0), 0.0);
  for (double mu : {0.5, 2.0, 5.0}) EXPECT_LE(check_scaling_symmetry(seed, 0.0, mu, 10.0), 1e-6);
  auto shr = seed_point(build_series({-2.25, 1.0, 0.0}), 0.05);
  EXPECT_LE(check_scaling_symmetry(shr, -2.25, 2.0, 6.0), 1e-6);
  EXPECT_THROW(check_scaling_symmetry(seed, 0.0, 0.0, 10.0), DomainError);
}

TEST(Scaling, ShrinkerFamily) {
  // Rescaling the b = 1 shrinker by 3 gives the b = 3 shrinker.
  auto r = rescale(PhasePoint{0.5, {0.5, std::sqrt(1 + 0.0625), std::sqrt(1 + 0.0625)},
                              {0.125 / 1.0625, -0.25, -0.25}},
                   3.0, -2.25);
  EXPECT_NEAR(r.lambda, -9.0 / (4 * 9.0), 1e-15);
  const double t = 1.5, q = 9 + t * t / 4;
  EXPECT_NEAR(r.point.t, t, 1e-15);
  EXPECT_NEAR(r.point.f[1], std::sqrt(q), 1e-14);
  EXPECT_NEAR(r.point.tau[0], t * t * t / q, 1e-14);
}

TEST(Regions, AboveBelowAndOnThreshold) {
  auto inc = check_preserved_regions(solve_closure({0.0, 1.0, 3.0}), 3.0);
  EXPECT_TRUE(inc.entered_upper);
  EXPECT_TRUE(inc.upper_preserved);
  EXPECT_FALSE(inc.entered_lower);
  EXPECT_GT(inc.min_growth_margin, 0.0);

  auto ac = check_preserved_regions(solve_closure({0.0, 2.0, 3.0}), 3.0);
  EXPECT_TRUE(ac.entered_lower);
  EXPECT_TRUE(ac.lower_preserved);
  EXPECT_FALSE(ac.entered_upper);

  auto ex = check_preserved_regions(solve_closure({0.0, kSqrt2, 3.0}, seeded_at(0.1, 10.0)), 3.0);
  EXPECT_LE(ex.max_abs_lambda_minus_1, 1e-6);
  EXPECT_LE(ex.max_abs_d_minus_1, 1e-6);
  EXPECT_TRUE(std::isnan(ex.first_violation));
}

TEST(Regions, ScaledC) {
  // c = 1.5 with b = 0.5 is the b = 1, c = 3 run scaled by 1/2.
  auto r = check_preserved_regions(solve_closure({0.0, 0.5, 1.5}), 1.5);
  EXPECT_TRUE(r.entered_upper);
  EXPECT_TRUE(r.upper_preserved);
  EXPECT_THROW(check_preserved_regions(Trajectory{}, 0.0), DomainError);
}

TEST(Properties, SteadyMonotonicityAndDominance) {
  for (auto [b, c] : std::vector<std::pair<double, double>>{{1.0, 3.0}, {2.0, 3.0}, {0.7, 0.5}, {1.5, 2.5}}) {
    IntegratorConfig cfg;
    cfg.t_max = 50.0;
    SolveOptions opt;
    opt.integrator = cfg;
    auto tr = solve_closure({0.0, b, c}, opt);
    int crossings = 0;
    for (std::size_t k = 1; k < tr.samples.size(); ++k) {
      const auto& p = tr.samples[k].p;
      EXPECT_GE(tr.samples[k].d.df[0], 0.0);
      EXPECT_GT(p.f[1], std::max(p.f[0], p.f[2]));
      EXPECT_GT(tr.samples[k].obs.u, 0.0);
    }
    for (const auto& e : tr.events) crossings += e.kind == EventKind::F1EqualsF3;
    EXPECT_EQ(crossings, 1) << "b = " << b << ", c = " << c;
    const auto& last = tr.samples.back().p;
    EXPECT_GT(last.f[0], last.f[2]);
  }
}

TEST(Sp2, LocusIsInvariant) {
  using State3 = std::array<double, 3>;
  namespace odeint = boost::numeric::odeint;
  for (double lambda : {-1.0, 0.0, 0.5}) {
    SolveOptions opt;
    opt.group = Group::Sp2;
    opt.integrator.t_max = 20.0;
    opt.integrator.output_times = {5.0, 10.0, 20.0};
    auto tr = solve_closure({lambda, 1.0, 0.0}, opt);
    ASSERT_GT(tr.t_end(), 1.0);
    for (const auto& s : tr.samples) {
      EXPECT_NEAR(s.p.f[1], s.p.f[2], 1e-9 * s.p.f[1]);
      EXPECT_NEAR(s.p.tau[1], s.p.tau[2], 1e-9 * std::max(1.0, std::abs(s.p.tau[1])));
    }
    // Independent integration of the reduced system in (f1^2, f2^2, tau2).
    const auto& s0 = tr.samples.front().p;
    State3 x{sqr(s0.f[0]), sqr(s0.f[1]), s0.tau[1]};
    auto sys = [lambda](const State3& y, State3& dy, double) {
      auto d = rhs_sp2(Sp2Point{std::sqrt(y[0]), std::sqrt(y[1]), y[2]}, lambda);
      dy = {d[0], d[1], d[2]};
    };
    const Sample* last = nullptr;
    for (const auto& s : tr.samples)
      for (double t : opt.integrator.output_times)
        if (s.p.t == t) last = &s;
    ASSERT_NE(last, nullptr);
    const double t_end = last->p.t;
    odeint::integrate_adaptive(odeint::make_controlled<odeint::runge_kutta_dopri5<State3>>(1e-13, 1e-13), sys, x,
                               s0.t, t_end, 1e-3);
    const auto& p = last->p;
    EXPECT_NEAR(std::sqrt(x[0]), p.f[0], 1e-8 * std::max(1.0, p.f[0]));
    EXPECT_NEAR(std::sqrt(x[1]), p.f[1], 1e-8 * std::max(1.0, p.f[1]));
    EXPECT_NEAR(x[2], p.tau[1], 1e-8 * std::max(1.0, std::abs(p.tau[1])));
  }
}
