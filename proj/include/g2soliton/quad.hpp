#pragma once

#include <vector>

#include <boost/multiprecision/float128.hpp>
#include <boost/numeric/odeint.hpp>

#include "analysis.hpp"
#include "closure.hpp"
#include "integrator.hpp"

// Quadruple-precision continuation (binary128, needs libquadmath).

namespace g2s {

using Quad = boost::multiprecision::float128;
using QuadState = std::vector<Quad>;

}  // namespace g2s

namespace boost::numeric::odeint::detail {
template <>
struct extract_value_type<g2s::Quad, void> {
  typedef g2s::Quad type;
};
}  // namespace boost::numeric::odeint::detail

namespace g2s {

struct QuadConfig {
  double tol = 1e-26;          // absolute and relative
  double seed_target = 1e-30;  // truncation target for the default seed time
};

// Seed in binary128 from the series coefficients computed in binary128.
inline QuadState quad_seed(const ClosureParams& cp, Group group, int order, double t0) {
  if (!(t0 > 0.0)) throw SeedError("quad_seed: t0 must be positive");
  auto a = detail::series_coefficients<Quad>(cp, group, order);
  QuadState x(6);
  const Quad t = t0;
  for (int j = 0; j < 6; ++j) x[j] = horner(a[j], t);
  if (!(x[0] > 0 && x[1] > 0 && x[2] > 0)) throw SeedError("quad_seed: t0 beyond the range of the series");
  return x;
}

// Bulirsch-Stoer continuation with dense output in binary128; samples are rounded to double.
inline Trajectory integrate_quad(const QuadState& x0, double t0, double lambda, const IntegratorConfig& cfg = {},
                                 const QuadConfig& qc = {}) {
  namespace odeint = boost::numeric::odeint;
  if (x0.size() != 6) throw DomainError("integrate_quad: state must have six components");
  if (!(x0[0] > 0 && x0[1] > 0 && x0[2] > 0)) throw DomainError("integrate_quad: coefficients must be positive");
  if (!(cfg.t_max > t0)) throw DomainError("integrate_quad: t_max must exceed the seed time");
  odeint::bulirsch_stoer_dense_out<QuadState, Quad, QuadState, Quad> stepper{Quad(qc.tol), Quad(qc.tol)};
  stepper.initialize(x0, Quad(t0), Quad(1e-3 * std::max(t0, 1e-3)));
  return detail::integrate_dense(stepper, x0, t0, lambda, cfg);
}

inline Trajectory integrate_quad(const PhasePoint& seed, double lambda, const IntegratorConfig& cfg = {},
                                 const QuadConfig& qc = {}) {
  require_positive(seed.f, "integrate_quad");
  QuadState x0{seed.f[0], seed.f[1], seed.f[2], seed.tau[0], seed.tau[1], seed.tau[2]};
  return integrate_quad(x0, seed.t, lambda, cfg, qc);
}

// solve_closure with the series and the continuation carried out in binary128.
inline Trajectory solve_closure_quad(const ClosureParams& cp, SolveOptions opt = {}, const QuadConfig& qc = {}) {
  auto s = build_series(cp, opt.group, opt.order);
  const double t0 = opt.t0 ? *opt.t0 : default_seed_time(s, qc.seed_target);
  seed_point(s, t0);
  opt.integrator.blowup_threshold = 1e-6 * cp.b;
  return integrate_quad(quad_seed(cp, opt.group, opt.order, t0), t0, cp.lambda, opt.integrator, qc);
}

}  // namespace g2s
