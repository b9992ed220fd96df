#pragma once

#include <array>
#include <vector>

#include "domain.hpp"

namespace g2s {

template <typename T>
using Triple = std::array<T, 3>;

template <typename T>
struct Derivative {
  Triple<T> df;
  Triple<T> dtau;
};

// First-order system in (f, tau) for general lambda.
template <typename T>
Derivative<T> rhs_su3(const Triple<T>& f, const Triple<T>& tau, double lambda) {
  Triple<T> f2{f[0] * f[0], f[1] * f[1], f[2] * f[2]};
  T fb = f2[0] + f2[1] + f2[2];
  T P = f[0] * f[1] * f[2];
  T taubar = tau[0] + tau[1] + tau[2];
  T nt = tau[0] * tau[0] / (f2[0] * f2[0]) + tau[1] * tau[1] / (f2[1] * f2[1]) +
         tau[2] * tau[2] / (f2[2] * f2[2]);
  Derivative<T> d;
  for (int i = 0; i < 3; ++i) {
    T dfi2 = tau[i] - f2[i] * (2.0 * f2[i] - fb) / P;
    d.df[i] = dfi2 / (2.0 * f[i]);
    T S = 3.0 * f2[i] - fb - 1.5 * P * tau[i] / f2[i];
    d.dtau[i] = ((4.0 * lambda / 3.0) * f2[i] * S + taubar * (tau[i] - 2.0 * f2[i] * f2[i] / P) +
                 nt * fb * f2[i] / 3.0) /
                fb;
  }
  return d;
}

inline Derivative<double> rhs_su3(const PhasePoint& p, double lambda) {
  require_positive(p.f, "rhs_su3");
  return rhs_su3<double>(p.f, p.tau, lambda);
}

// Sp(2) reduction f2 = f3, tau2 = tau3: returns ((f1^2)', (f2^2)', tau2').
template <typename T>
Triple<T> rhs_sp2(const T& f1, const T& f2, const T& tau2, double lambda) {
  T a = f1 * f1, q = f2 * f2;
  T R1 = lambda * f1 * q - 3.0 * tau2;
  T S = q - a - 1.5 * f1 * tau2;
  return {2.0 * f1 - (a / q) * (f1 + 2.0 * tau2), f1 + tau2, 4.0 * R1 * S / (3.0 * f1 * (a + 2.0 * q))};
}

struct Sp2Point {
  double f1 = 1.0;
  double f2 = 1.0;
  double tau2 = 0.0;
};

inline Vec3 rhs_sp2(const Sp2Point& q, double lambda) {
  if (!(q.f1 > 0.0 && q.f2 > 0.0)) throw DomainError("rhs_sp2: coefficients must be positive");
  return rhs_sp2<double>(q.f1, q.f2, q.tau2, lambda);
}

struct Sp2Aux {
  double tau1;
  double u;
};

inline Sp2Aux recover_sp2_aux(double f1, double f2, double tau2, double lambda) {
  if (!(f1 > 0.0 && f2 > 0.0)) throw DomainError("recover_sp2_aux: coefficients must be positive");
  double a = f1 * f1, q = f2 * f2;
  return {-2.0 * a * tau2 / q, (2.0 * (q - a) * tau2 - 2.0 * lambda * f1 * q * q) / (q * (a + 2.0 * q))};
}

inline Sp2Aux recover_sp2_aux(const Sp2Point& q, double lambda) { return recover_sp2_aux(q.f1, q.f2, q.tau2, lambda); }

// Embeds an Sp(2) state into the SU(3) phase space.
inline PhasePoint embed_sp2(double t, double f1, double f2, double tau2) {
  return {t, {f1, f2, f2}, {-2.0 * f1 * f1 * tau2 / (f2 * f2), tau2, tau2}};
}

template <typename T>
struct ScaleNormalizedDerivative {
  T dg;
  Triple<T> dF;
  Triple<T> dT;
};

// t-derivatives of the scale-normalised variables (g, F, T).
template <typename T>
ScaleNormalizedDerivative<T> rhs_scale_normalized(const T& g, const Triple<T>& F, const Triple<T>& Tv,
                                                  double lambda) {
  Triple<T> F2{F[0] * F[0], F[1] * F[1], F[2] * F[2]};
  T fb = F2[0] + F2[1] + F2[2];
  T Tb = Tv[0] + Tv[1] + Tv[2];
  T nt = Tv[0] * Tv[0] / (F2[0] * F2[0]) + Tv[1] * Tv[1] / (F2[1] * F2[1]) + Tv[2] * Tv[2] / (F2[2] * F2[2]);
  ScaleNormalizedDerivative<T> d;
  d.dg = fb / 6.0;
  for (int i = 0; i < 3; ++i) {
    d.dF[i] = (Tv[i] - 2.0 * F2[i] * F2[i] + (2.0 / 3.0) * fb * F2[i]) / (2.0 * F[i] * g);
    T S = 3.0 * F2[i] - fb - 1.5 * Tv[i] / F2[i];
    d.dT[i] = ((4.0 * lambda / 3.0) * g * g * F2[i] * S / fb + (Tb / fb) * (Tv[i] - 2.0 * F2[i] * F2[i]) +
               nt * F2[i] / 3.0 - Tv[i] * fb / 6.0) /
              g;
  }
  return d;
}

inline ScaleNormalizedDerivative<double> rhs_scale_normalized(const ScaleInvariantPoint& sp, double lambda) {
  require_positive(sp.F, "rhs_scale_normalized");
  if (!(sp.g > 0.0)) throw DomainError("rhs_scale_normalized: g must be positive");
  return rhs_scale_normalized<double>(sp.g, sp.F, sp.T, lambda);
}

// Steady system in the s-variable (ds = dt/g), state (F, T); independent of g.
template <typename T>
std::array<T, 6> rhs_steady_normalized_s(const std::array<T, 6>& y) {
  Triple<T> F{y[0], y[1], y[2]}, Tv{y[3], y[4], y[5]};
  auto d = rhs_scale_normalized<T>(T(1.0), F, Tv, 0.0);
  return {d.dF[0], d.dF[1], d.dF[2], d.dT[0], d.dT[1], d.dT[2]};
}

struct SteadyConstants {
  double c = 0.0;
  Vec3 cvec() const { return {0.0, c, -c}; }
};

// Steady system reduced to f using the conserved quantities tau_i - u f_i^2 = (0, c, -c).
template <typename T>
Triple<T> rhs_steady_f(const Triple<T>& f, double c) {
  Triple<T> f2{f[0] * f[0], f[1] * f[1], f[2] * f[2]};
  T fb = f2[0] + f2[1] + f2[2];
  T P = f[0] * f[1] * f[2];
  T u = (c / 3.0) * (1.0 / f2[2] - 1.0 / f2[1]);
  const double ci[3] = {0.0, c, -c};
  Triple<T> d;
  for (int i = 0; i < 3; ++i) d[i] = 0.5 * f[i] * (u + ci[i] / f2[i] + (fb - 2.0 * f2[i]) / P);
  return d;
}

inline Vec3 rhs_steady_f(const Vec3& f, const SteadyConstants& k) {
  require_positive(f, "rhs_steady_f");
  return rhs_steady_f<double>(f, k.c);
}

// Steady polynomial system in F_i = f_i/(f_j f_k).
template <typename T>
Triple<T> rhs_steady_poly(const Triple<T>& F, double c) {
  const double k = c / 3.0;
  return {k * F[0] * F[0] * (F[1] - F[2]) + 0.5 * F[0] * (F[1] + F[2] - 3.0 * F[0]),
          k * F[0] * F[1] * (F[1] + 2.0 * F[2]) + 0.5 * F[1] * (F[0] + F[2] - 3.0 * F[1]),
          -k * F[0] * F[2] * (2.0 * F[1] + F[2]) + 0.5 * F[2] * (F[0] + F[1] - 3.0 * F[2])};
}

// (D', Lambda', F1') for c = 3, with Lambda = F1 (F2 + F3), D = F2 - F3.
inline Vec3 rhs_lambda_d(double Lambda, double D, double F1) {
  if (F1 == 0.0) throw DomainError("rhs_lambda_d: F1 must be non-zero");
  return {-0.5 * F1 * D * (D - 1.0) + (1.5 * Lambda / F1) * (Lambda - D),
          F1 * ((Lambda - 1.0) * D * D - Lambda * sqr(D - 1.0)), F1 * F1 * (D - 1.5) + 0.5 * Lambda};
}

struct MixedOrderResidual {
  Vec3 tau{};          // max |(tau_i - u f_i^2)' - lambda f_i^2|
  double closure = 0;  // max |2 P' - fbar^2|
};

// Five-point stencil check of the mixed-order system on uniformly spaced samples.
// u[k] is used when supplied, otherwise u is recovered from each sample.
inline MixedOrderResidual mixed_order_residual(const std::vector<PhasePoint>& w, double lambda,
                                               const std::vector<double>& u = {}) {
  if (w.size() < 5) throw InsufficientData("mixed_order_residual: need at least 5 samples");
  if (!u.empty() && u.size() != w.size()) throw DomainError("mixed_order_residual: u size mismatch");
  const double h = w[1].t - w[0].t;
  if (!(h > 0.0)) throw DomainError("mixed_order_residual: samples must increase in t");
  for (std::size_t k = 1; k < w.size(); ++k)
    if (std::abs((w[k].t - w[k - 1].t) - h) > 1e-9 * std::abs(h) + 1e-14 * std::abs(w[k].t))
      throw DomainError("mixed_order_residual: samples must be uniformly spaced");

  const std::size_t n = w.size();
  std::vector<Vec3> q(n);
  std::vector<double> P(n);
  for (std::size_t k = 0; k < n; ++k) {
    double uk = u.empty() ? recover_u(w[k], lambda) : u[k];
    for (int i = 0; i < 3; ++i) q[k][i] = w[k].tau[i] - uk * sqr(w[k].f[i]);
    P[k] = volume(w[k].f);
  }
  auto d5 = [h](double m2, double m1, double p1, double p2) { return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h); };
  MixedOrderResidual r;
  for (std::size_t k = 2; k + 2 < n; ++k) {
    for (int i = 0; i < 3; ++i) {
      double dq = d5(q[k - 2][i], q[k - 1][i], q[k + 1][i], q[k + 2][i]);
      r.tau[i] = std::max(r.tau[i], std::abs(dq - lambda * sqr(w[k].f[i])));
    }
    double dP = d5(P[k - 2], P[k - 1], P[k + 1], P[k + 2]);
    r.closure = std::max(r.closure, std::abs(2.0 * dP - fbar2(w[k].f)));
  }
  return r;
}

}  // namespace g2s
