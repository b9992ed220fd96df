#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace g2s {

using Vec3 = std::array<double, 3>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input outside the domain of a formula (non-positive coefficient, bad parameter).
struct DomainError : Error {
  using Error::Error;
};

// Not enough data for a fit or stencil.
struct InsufficientData : Error {
  using Error::Error;
};

enum class Group { SU3, Sp2 };

inline const char* to_string(Group g) { return g == Group::SU3 ? "SU3" : "Sp2"; }

// Metric coefficients f_i and torsion components tau_i at radius t.
struct PhasePoint {
  double t = 0.0;
  Vec3 f{};
  Vec3 tau{};
};

// Parameters of a smoothly-closing solution: soliton constant lambda,
// size b of the singular orbit, torsion parameter c.
struct ClosureParams {
  double lambda = 0.0;
  double b = 1.0;
  double c = 0.0;
};

// Scale-normalised variables: g^3 = f1 f2 f3, F = f/g, T = tau/g.
struct ScaleInvariantPoint {
  double g = 1.0;
  Vec3 F{};
  Vec3 T{};
};

// Polynomial variables F_i = f_i/(f_j f_k) of the steady system.
struct PolyPoint {
  Vec3 F{};
};

struct Observables {
  double u = 0.0;
  double taubar = 0.0;
  double fbar2 = 0.0;
  double volume = 0.0;
  double normTauSq = 0.0;
  double scalarCurvature = 0.0;
  Vec3 S{};
  Vec3 E{};
  double Lambda = 0.0;
  double D = 0.0;
  double clResidual = 0.0;
  double constraintResidual = 0.0;
};

enum class EndKind { Incomplete, CompleteAC, CompleteExponentialEnd, Undetermined };

inline const char* to_string(EndKind k) {
  switch (k) {
    case EndKind::Incomplete: return "Incomplete";
    case EndKind::CompleteAC: return "CompleteAC";
    case EndKind::CompleteExponentialEnd: return "CompleteExponentialEnd";
    default: return "Undetermined";
  }
}

struct EndClassification {
  EndKind kind = EndKind::Undetermined;
  double blowup_time = NAN;  // Incomplete only
  double rate = NAN;         // CompleteAC only; NaN when the tail was too short to fit
  std::string reason;        // Undetermined only
};

template <typename T>
constexpr T sqr(const T& x) { return x * x; }

inline void require_positive(const Vec3& f, const char* what) {
  for (double x : f)
    if (!(x > 0.0)) throw DomainError(std::string(what) + ": coefficients must be positive");
}

inline double fbar2(const Vec3& f) { return f[0] * f[0] + f[1] * f[1] + f[2] * f[2]; }
inline double volume(const Vec3& f) { return f[0] * f[1] * f[2]; }

// sum_i tau_i / f_i^2; vanishes on every solution.
inline double constraint_residual(const PhasePoint& p) {
  require_positive(p.f, "constraint_residual");
  return p.tau[0] / sqr(p.f[0]) + p.tau[1] / sqr(p.f[1]) + p.tau[2] / sqr(p.f[2]);
}

// Constraint residual divided by sum_i |tau_i|/f_i^2 (zero when all tau vanish).
inline double relative_constraint_residual(const PhasePoint& p) {
  double r = constraint_residual(p);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += std::abs(p.tau[i]) / sqr(p.f[i]);
  return s > 0.0 ? r / s : r;
}

inline double recover_u(const PhasePoint& p, double lambda) {
  require_positive(p.f, "recover_u");
  double taubar = p.tau[0] + p.tau[1] + p.tau[2];
  return (taubar - 2.0 * lambda * volume(p.f)) / fbar2(p.f);
}

inline double norm_tau_sq(const PhasePoint& p) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += sqr(p.tau[i]) / sqr(sqr(p.f[i]));
  return s;
}

inline Observables observables(const PhasePoint& p, double lambda, std::optional<double> u = {}) {
  require_positive(p.f, "observables");
  Observables o;
  o.fbar2 = fbar2(p.f);
  o.volume = volume(p.f);
  o.taubar = p.tau[0] + p.tau[1] + p.tau[2];
  o.u = u ? *u : recover_u(p, lambda);
  o.normTauSq = norm_tau_sq(p);
  o.scalarCurvature = -0.5 * o.normTauSq;
  for (int i = 0; i < 3; ++i) {
    double fi2 = sqr(p.f[i]);
    o.E[i] = 3.0 * fi2 - o.fbar2;
    o.S[i] = o.E[i] - 1.5 * o.volume * p.tau[i] / fi2;
  }
  o.Lambda = 1.0 / sqr(p.f[1]) + 1.0 / sqr(p.f[2]);
  o.D = p.f[1] / (p.f[0] * p.f[2]) - p.f[2] / (p.f[0] * p.f[1]);
  o.clResidual = o.taubar - o.u * o.fbar2 - 2.0 * lambda * o.volume;
  o.constraintResidual = constraint_residual(p);
  return o;
}

inline ScaleInvariantPoint to_scale_invariant(const PhasePoint& p) {
  require_positive(p.f, "to_scale_invariant");
  ScaleInvariantPoint s;
  s.g = std::cbrt(volume(p.f));
  for (int i = 0; i < 3; ++i) {
    s.F[i] = p.f[i] / s.g;
    s.T[i] = p.tau[i] / s.g;
  }
  return s;
}

inline PhasePoint from_scale_invariant(const ScaleInvariantPoint& s, double t = 0.0) {
  if (!(s.g > 0.0)) throw DomainError("from_scale_invariant: g must be positive");
  PhasePoint p;
  p.t = t;
  for (int i = 0; i < 3; ++i) {
    p.f[i] = s.g * s.F[i];
    p.tau[i] = s.g * s.T[i];
  }
  return p;
}

inline PolyPoint to_poly(const Vec3& f) {
  require_positive(f, "to_poly");
  return {{f[0] / (f[1] * f[2]), f[1] / (f[0] * f[2]), f[2] / (f[0] * f[1])}};
}

inline PolyPoint to_poly(const PhasePoint& p) { return to_poly(p.f); }

// Inverse of to_poly: f_i^2 = 1/(F_j F_k).
inline Vec3 from_poly(const PolyPoint& q) {
  require_positive(q.F, "from_poly");
  const auto& F = q.F;
  return {1.0 / std::sqrt(F[1] * F[2]), 1.0 / std::sqrt(F[0] * F[2]), 1.0 / std::sqrt(F[0] * F[1])};
}

struct Rescaled {
  PhasePoint point;
  double lambda;
};

// (t, f, tau, lambda) -> (mu t, mu f, mu tau, lambda / mu^2).
inline Rescaled rescale(const PhasePoint& p, double mu, double lambda) {
  if (!(mu > 0.0)) throw DomainError("rescale: mu must be positive");
  Rescaled r{p, lambda / (mu * mu)};
  r.point.t *= mu;
  for (int i = 0; i < 3; ++i) {
    r.point.f[i] *= mu;
    r.point.tau[i] *= mu;
  }
  return r;
}

inline ClosureParams rescale(const ClosureParams& cp, double mu) {
  if (!(mu > 0.0)) throw DomainError("rescale: mu must be positive");
  return {cp.lambda / (mu * mu), cp.b * mu, cp.c * mu};
}

}  // namespace g2s
