#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "domain.hpp"
#include "systems.hpp"

namespace g2s {

struct OraclePoint {
  PhasePoint point;
  double u = 0.0;
  bool singular_orbit = false;  // t = 0: f1 = 0, only limits are returned
};

// Torsion-free cone f_i = t/2, tau = 0.
inline OraclePoint torsion_free_cone(double t, double lambda) {
  if (!(t > 0.0)) throw DomainError("torsion_free_cone: t must be positive");
  return {{t, {t / 2, t / 2, t / 2}, {0, 0, 0}}, -lambda * t / 3.0, false};
}

// Closed-form steady soliton with b = sqrt(2), c = 3.
inline OraclePoint explicit_steady(double t) {
  if (t < 0.0) throw DomainError("explicit_steady: t must be non-negative");
  if (t == 0.0) return {{0.0, {0.0, std::sqrt(2.0), std::sqrt(2.0)}, {0.0, 3.0, -3.0}}, 0.0, true};
  const double sh = std::sinh(t / 2), th = std::tanh(t / 2);
  OraclePoint o;
  o.point.t = t;
  o.point.f = {2 * sh, std::sqrt(1 + std::exp(t)), std::sqrt(1 + std::exp(-t))};
  o.point.tau = {4 * th * sh * sh, 2 + std::exp(t), -(2 + std::exp(-t))};
  o.u = th;
  return o;
}

inline double explicit_shrinker_lambda(double b) { return -9.0 / (4.0 * b * b); }

// Closed-form Sp(2)-invariant shrinker with lambda = -9/(4 b^2).
inline OraclePoint explicit_shrinker(double t, double b) {
  if (!(b > 0.0)) throw DomainError("explicit_shrinker: b must be positive");
  if (t < 0.0) throw DomainError("explicit_shrinker: t must be non-negative");
  const double q = b * b + t * t / 4;
  OraclePoint o;
  o.point.t = t;
  o.point.f = {t, std::sqrt(q), std::sqrt(q)};
  o.point.tau = {t * t * t / q, -t / 2, -t / 2};
  o.u = 3 * t / (4 * b * b) + 4 * t / (4 * b * b + t * t);
  o.singular_orbit = t == 0.0;
  return o;
}

// Torsion-free Sp(2)-invariant metric in the radial parameter r > |mu|; dt/dr = (r^2 - mu^2)^(-1/4).
inline OraclePoint bryant_salamon(double r, double mu) {
  if (!(r > std::abs(mu))) throw DomainError("bryant_salamon: requires r > |mu|");
  const double w = std::pow(r * r - mu * mu, 0.25);
  OraclePoint o;
  o.point.t = r;
  o.point.f = {r / w, w, w};
  o.point.tau = {0, 0, 0};
  return o;
}

enum class Oracle { Cone, ExplicitSteady, ExplicitShrinker, BryantSalamon };

struct OracleResidual {
  double max_residual = 0.0;  // max |lhs - rhs| / max(1, |lhs|) over components and samples
  double at = NAN;
};

// Substitutes a closed-form solution into the first-order system.
// `param` is lambda (Cone), b (ExplicitShrinker) or mu (BryantSalamon); samples are r for BryantSalamon.
inline OracleResidual oracle_residual(Oracle kind, const std::vector<double>& samples, double param = 0.0) {
  OracleResidual res;
  for (double s : samples) {
    OraclePoint o;
    Derivative<double> lhs;
    double lambda = 0.0;
    switch (kind) {
      case Oracle::Cone:
        lambda = param;
        o = torsion_free_cone(s, lambda);
        lhs = {{0.5, 0.5, 0.5}, {0, 0, 0}};
        break;
      case Oracle::ExplicitSteady: {
        if (!(s > 0.0)) throw DomainError("oracle_residual: t must be positive");
        o = explicit_steady(s);
        const double th = std::tanh(s / 2), e = std::exp(s), ei = std::exp(-s);
        lhs.df = {std::cosh(s / 2), e / (2 * o.point.f[1]), -ei / (2 * o.point.f[2])};
        lhs.dtau = {2 * th * th + 2 * th * std::sinh(s), e, ei};
        break;
      }
      case Oracle::ExplicitShrinker: {
        if (!(s > 0.0)) throw DomainError("oracle_residual: t must be positive");
        lambda = explicit_shrinker_lambda(param);
        o = explicit_shrinker(s, param);
        const double b2 = param * param, q = b2 + s * s / 4;
        lhs.df = {1.0, s / (4 * o.point.f[1]), s / (4 * o.point.f[2])};
        const double dt1 = (3 * s * s * b2 + s * s * s * s / 4) / (q * q);
        lhs.dtau = {dt1, -0.5, -0.5};
        break;
      }
      case Oracle::BryantSalamon: {
        o = bryant_salamon(s, param);
        const double q = s * s - param * param, drdt = std::pow(q, 0.25);
        const double df1 = std::pow(q, -0.25) * (1 - s * s / (2 * q)), df2 = 0.5 * s * std::pow(q, -0.75);
        lhs.df = {df1 * drdt, df2 * drdt, df2 * drdt};
        lhs.dtau = {0, 0, 0};
        break;
      }
    }
    auto rhs = rhs_su3(o.point, lambda);
    for (int i = 0; i < 3; ++i) {
      double r1 = std::abs(lhs.df[i] - rhs.df[i]) / std::max(1.0, std::abs(lhs.df[i]));
      double r2 = std::abs(lhs.dtau[i] - rhs.dtau[i]) / std::max(1.0, std::abs(lhs.dtau[i]));
      double r = std::max(r1, r2);
      if (r > res.max_residual || std::isnan(r)) {
        res.max_residual = std::isnan(r) ? INFINITY : r;
        res.at = s;
      }
    }
  }
  return res;
}

}  // namespace g2s
