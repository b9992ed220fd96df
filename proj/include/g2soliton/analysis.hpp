#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <optional>
#include <vector>

#include "closure.hpp"
#include "domain.hpp"
#include "integrator.hpp"
#include "systems.hpp"

namespace g2s {

struct NotBracketed : Error {
  using Error::Error;
};

struct SolveOptions {
  Group group = Group::SU3;
  int order = 20;
  std::optional<double> t0;  // default: default_seed_time
  IntegratorConfig integrator;
};

// Series seed plus numerical continuation of the smoothly-closing solution.
inline Trajectory solve_closure(const ClosureParams& cp, SolveOptions opt = {}) {
  auto s = build_series(cp, opt.group, opt.order);
  const double t0 = opt.t0 ? *opt.t0 : default_seed_time(s);
  auto seed = seed_point(s, t0);
  opt.integrator.blowup_threshold = 1e-6 * cp.b;
  return integrate(seed, cp.lambda, opt.integrator);
}

// Distance of the scale-normalised state from the torsion-free cone (F, T) = (1, 0).
inline double cone_deviation(const PhasePoint& p) {
  auto s = to_scale_invariant(p);
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += sqr(s.F[i] - 1.0) + sqr(s.T[i]);
  return std::sqrt(d);
}

struct ClassifyConfig {
  double ac_tolerance = 0.05;
  double ac_window = 1.0;  // in ln t
  double exp_tolerance = 0.02;
  double exp_dwell = 10.0;  // in t
  double noise_floor = 1e-9;
  double min_fit_window = 0.5;  // in ln t
};

struct RateFit {
  double rate = NAN;
  double t_lo = NAN;
  double t_hi = NAN;
  std::size_t n = 0;
};

namespace detail {

// Index of the first sample from which the cone deviation stays below tol to the end.
inline std::optional<std::size_t> ac_entry(const Trajectory& tr, double tol) {
  if (tr.samples.empty()) return std::nullopt;
  std::size_t k = tr.samples.size();
  while (k > 0 && cone_deviation(tr.samples[k - 1].p) < tol) --k;
  if (k == tr.samples.size()) return std::nullopt;
  return k;
}

}  // namespace detail

// Least-squares slope of ln(cone deviation) against ln t over the tail: the later half (in ln t)
// of the part of the run inside the cone neighbourhood and above the noise floor.
inline RateFit fit_rate(const Trajectory& tr, const ClassifyConfig& cfg = {}) {
  auto entry = detail::ac_entry(tr, cfg.ac_tolerance);
  if (!entry) throw InsufficientData("fit_rate: the run never settles near the cone");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = *entry; k < tr.samples.size(); ++k) {
    const auto& p = tr.samples[k].p;
    double d = cone_deviation(p);
    if (d < cfg.noise_floor) break;
    pts.emplace_back(std::log(p.t), std::log(d));
  }
  if (pts.size() < 2) throw InsufficientData("fit_rate: tail too short");
  const double mid = 0.5 * (pts.front().first + pts.back().first);
  std::vector<std::pair<double, double>> tail;
  for (auto& q : pts)
    if (q.first >= mid) tail.push_back(q);
  if (tail.size() < 4 || tail.back().first - tail.front().first < cfg.min_fit_window)
    throw InsufficientData("fit_rate: tail too short");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(tail.size());
  for (auto& [x, y] : tail) sx += x, sy += y, sxx += x * x, sxy += x * y;
  RateFit r;
  r.rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  r.t_lo = std::exp(tail.front().first);
  r.t_hi = std::exp(tail.back().first);
  r.n = tail.size();
  return r;
}

// Exponential-end fixed point of the polynomial system for torsion parameter c != 0.
inline Vec3 exponential_end_point(double c) {
  if (c == 0.0) throw DomainError("exponential_end_point: c must be non-zero");
  const double a = 3.0 / std::abs(c);
  return c > 0 ? Vec3{a, a, 0.0} : Vec3{a, 0.0, a};
}

// Steady torsion parameter c = tau2 - u f2^2 read off a state.
inline double steady_c(const PhasePoint& p) { return p.tau[1] - recover_u(p, 0.0) * sqr(p.f[1]); }

inline EndClassification classify_end(const Trajectory& tr, const ClassifyConfig& cfg = {}) {
  EndClassification out;
  if (tr.samples.size() < 2) {
    out.reason = "empty trajectory";
    return out;
  }
  if (tr.lambda == 0.0) {
    const double c = steady_c(tr.samples.front().p);
    if (std::abs(c) > 1e-12) {
      const Vec3 q = exponential_end_point(c);
      double start = NAN;
      for (const auto& s : tr.samples) {
        auto F = to_poly(s.p).F;
        double d = std::sqrt(sqr(F[0] - q[0]) + sqr(F[1] - q[1]) + sqr(F[2] - q[2]));
        if (d < cfg.exp_tolerance) {
          if (std::isnan(start)) start = s.p.t;
          if (s.p.t - start >= cfg.exp_dwell) {
            out.kind = EndKind::CompleteExponentialEnd;
            return out;
          }
        } else {
          start = NAN;
        }
      }
    }
  }
  if (tr.termination == Termination::BlowUp) {
    out.kind = EndKind::Incomplete;
    out.blowup_time = tr.events.empty() ? tr.t_end() : tr.events.back().t;
    return out;
  }
  auto entry = detail::ac_entry(tr, cfg.ac_tolerance);
  if (entry && std::log(tr.t_end() / tr.samples[*entry].p.t) >= cfg.ac_window) {
    out.kind = EndKind::CompleteAC;
    try {
      out.rate = fit_rate(tr, cfg).rate;
    } catch (const InsufficientData&) {
    }
    return out;
  }
  out.reason = std::string("no end behaviour detected (termination ") + to_string(tr.termination) + ")";
  return out;
}

// Completeness of steady smoothly-closing solutions: c^2 / b^2 against 9/2.
inline EndKind analytic_steady_class(double b, double c, double rel_tol = 1e-12) {
  if (!(b > 0.0)) throw DomainError("analytic_steady_class: b must be positive");
  const double r = c * c / (b * b);
  if (std::abs(r - 4.5) <= rel_tol * 4.5) return EndKind::CompleteExponentialEnd;
  return r < 4.5 ? EndKind::CompleteAC : EndKind::Incomplete;
}

struct GridRow {
  double b, c;
  EndClassification numerical;
  EndKind analytic;
  bool agree;
};

inline EndClassification classify_steady(double b, double c, const SolveOptions& opt = {},
                                         const ClassifyConfig& cc = {}) {
  return classify_end(solve_closure({0.0, b, c}, opt), cc);
}

// Classifies every (b, c) pair concurrently.
inline std::vector<GridRow> classify_steady_params(const std::vector<std::pair<double, double>>& grid,
                                                   const SolveOptions& opt = {}, const ClassifyConfig& cc = {}) {
  if (grid.empty()) throw DomainError("classify_steady_params: empty parameter grid");
  std::vector<std::future<EndClassification>> jobs;
  for (auto [b, c] : grid) {
    if (!(b > 0.0)) throw DomainError("classify_steady_params: b must be positive");
    jobs.push_back(std::async(std::launch::async, [=] { return classify_steady(b, c, opt, cc); }));
  }
  std::vector<GridRow> rows;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    GridRow r{grid[k].first, grid[k].second, jobs[k].get(), analytic_steady_class(grid[k].first, grid[k].second),
              false};
    r.agree = r.numerical.kind == r.analytic;
    rows.push_back(r);
  }
  return rows;
}

struct BoundaryResult {
  double estimate;
  double lo, hi;
  double reference;  // analytic threshold c^2 / b^2 = 9/2
  int probes = 0;
};

namespace detail {

// Multisection on a monotone predicate; three probes per round run concurrently.
inline BoundaryResult bisect_predicate(const std::function<bool(double)>& incomplete, double lo, double hi, double tol) {
  if (!(lo < hi)) throw DomainError("find_boundary: bracket must satisfy lo < hi");
  if (!(tol > 0.0)) throw DomainError("find_boundary: tolerance must be positive");
  auto e_lo = std::async(std::launch::async, incomplete, lo);
  auto e_hi = std::async(std::launch::async, incomplete, hi);
  const bool ilo = e_lo.get(), ihi = e_hi.get();
  if (ilo == ihi) throw NotBracketed("find_boundary: bracket does not contain a completeness transition");
  BoundaryResult r{NAN, lo, hi, NAN, 2};
  while (r.hi - r.lo > tol) {
    std::array<double, 3> x;
    std::array<std::future<bool>, 3> fut;
    for (int k = 0; k < 3; ++k) {
      x[k] = r.lo + (k + 1) * (r.hi - r.lo) / 4.0;
      fut[k] = std::async(std::launch::async, incomplete, x[k]);
    }
    double nlo = r.lo, nhi = r.hi;
    bool found = false;
    for (int k = 0; k < 3; ++k) {
      const bool v = fut[k].get();
      ++r.probes;
      if (found) continue;
      if (v == ilo) {
        nlo = x[k];
      } else {
        nhi = x[k];
        found = true;
      }
    }
    r.lo = nlo;
    r.hi = nhi;
  }
  r.estimate = 0.5 * (r.lo + r.hi);
  return r;
}

inline bool is_incomplete(double b, double c, const SolveOptions& opt, const ClassifyConfig& cc) {
  auto k = classify_steady(b, c, opt, cc);
  if (k.kind == EndKind::Undetermined) throw Error("find_boundary: probe undetermined: " + k.reason);
  return k.kind == EndKind::Incomplete;
}

}  // namespace detail

// Completeness threshold in b at fixed c.
inline BoundaryResult find_boundary_b(double c, double b_lo, double b_hi, double tol = 1e-3,
                                      const SolveOptions& opt = {}, const ClassifyConfig& cc = {}) {
  if (!(b_lo > 0.0)) throw DomainError("find_boundary: b must be positive");
  auto r = detail::bisect_predicate([&](double b) { return detail::is_incomplete(b, c, opt, cc); }, b_lo, b_hi, tol);
  r.reference = std::abs(c) * std::sqrt(2.0) / 3.0;
  return r;
}

// Completeness threshold in c at fixed b.
inline BoundaryResult find_boundary_c(double b, double c_lo, double c_hi, double tol = 1e-3,
                                      const SolveOptions& opt = {}, const ClassifyConfig& cc = {}) {
  if (!(b > 0.0)) throw DomainError("find_boundary: b must be positive");
  auto r = detail::bisect_predicate([&](double c) { return detail::is_incomplete(b, c, opt, cc); }, c_lo, c_hi, tol);
  r.reference = 3.0 * b / std::sqrt(2.0);
  return r;
}

template <int N>
using Jet = Eigen::AutoDiffScalar<Eigen::Matrix<double, N, 1>>;

struct FixedPointReport {
  Vec3 point;
  Eigen::Matrix3d jacobian;
  std::vector<std::complex<double>> eigenvalues;  // sorted by real part, descending
  Eigen::Matrix3cd eigenvectors;                  // column k <-> eigenvalues[k]
  double rhs_residual = 0.0;                      // max |rhs| at the point
  std::optional<Vec3> stable_plane_normal;        // one positive and two negative eigenvalues
  std::string kind;
};

inline Eigen::Matrix3d poly_jacobian(const Vec3& F, double c) {
  Triple<Jet<3>> x;
  for (int i = 0; i < 3; ++i) x[i] = Jet<3>(F[i], 3, i);
  auto d = rhs_steady_poly<Jet<3>>(x, c);
  Eigen::Matrix3d J;
  for (int i = 0; i < 3; ++i) J.row(i) = d[i].derivatives().transpose();
  return J;
}

inline FixedPointReport analyse_poly_fixed_point(const Vec3& F, double c) {
  FixedPointReport r;
  r.point = F;
  r.jacobian = poly_jacobian(F, c);
  auto f = rhs_steady_poly<double>(F, c);
  r.rhs_residual = std::max({std::abs(f[0]), std::abs(f[1]), std::abs(f[2])});
  Eigen::EigenSolver<Eigen::Matrix3d> es(r.jacobian);
  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return es.eigenvalues()(a).real() > es.eigenvalues()(b).real(); });
  for (int k = 0; k < 3; ++k) {
    r.eigenvalues.push_back(es.eigenvalues()(idx[k]));
    r.eigenvectors.col(k) = es.eigenvectors().col(idx[k]);
  }
  int pos = 0, neg = 0, zero = 0;
  for (auto e : r.eigenvalues) {
    if (std::abs(e.real()) < 1e-12) ++zero;
    else if (e.real() > 0) ++pos;
    else ++neg;
  }
  if (zero > 0) r.kind = "degenerate";
  else if (pos == 0) r.kind = "sink";
  else if (neg == 0) r.kind = "source";
  else r.kind = "saddle";
  if (pos == 1 && neg == 2 && std::abs(r.eigenvalues[0].imag()) < 1e-14) {
    // Left eigenvector of the unstable eigenvalue is normal to the stable plane.
    Eigen::EigenSolver<Eigen::Matrix3d> lt(r.jacobian.transpose());
    int best = 0;
    for (int i = 1; i < 3; ++i)
      if (lt.eigenvalues()(i).real() > lt.eigenvalues()(best).real()) best = i;
    Eigen::Vector3d n = lt.eigenvectors().col(best).real().normalized();
    if (n.sum() < 0) n = -n;
    r.stable_plane_normal = Vec3{n(0), n(1), n(2)};
  }
  return r;
}

// Fixed points of the steady polynomial system: the origin and, for c != 0, the exponential end.
inline std::vector<FixedPointReport> poly_fixed_points(double c) {
  std::vector<FixedPointReport> out{analyse_poly_fixed_point({0, 0, 0}, c)};
  if (c != 0.0) out.push_back(analyse_poly_fixed_point(exponential_end_point(c), c));
  return out;
}

struct ConeSpectrum {
  Eigen::Matrix<double, 6, 6> jacobian;         // full steady system in s at the cone
  Eigen::Matrix<double, 6, 4> basis;            // orthonormal basis of sum(zeta) = sum(eta) = 0
  Eigen::Matrix4d restricted;                   // jacobian on that subspace
  std::vector<double> eigenvalues;              // ascending
  Eigen::Matrix<double, 6, 4> eigenvectors;     // in the 6D coordinates, column k <-> eigenvalues[k]
};

// Linearisation of the steady scale-normalised system (variable s, ds = dt/g) at the cone.
inline ConeSpectrum cone_linearization() {
  std::array<Jet<6>, 6> y;
  for (int i = 0; i < 6; ++i) y[i] = Jet<6>(i < 3 ? 1.0 : 0.0, 6, i);
  auto d = rhs_steady_normalized_s<Jet<6>>(y);
  ConeSpectrum r;
  for (int i = 0; i < 6; ++i) r.jacobian.row(i) = d[i].derivatives().transpose();

  Eigen::Matrix<double, 2, 6> L = Eigen::Matrix<double, 2, 6>::Zero();
  L.block<1, 3>(0, 0).setOnes();
  L.block<1, 3>(1, 3).setOnes();
  Eigen::FullPivLU<Eigen::Matrix<double, 2, 6>> lu(L);
  Eigen::HouseholderQR<Eigen::Matrix<double, 6, 4>> qr(Eigen::Matrix<double, 6, 4>(lu.kernel()));
  r.basis = qr.householderQ() * Eigen::Matrix<double, 6, 4>::Identity();
  r.restricted = r.basis.transpose() * r.jacobian * r.basis;

  Eigen::EigenSolver<Eigen::Matrix4d> es(r.restricted);
  std::vector<int> idx{0, 1, 2, 3};
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return es.eigenvalues()(a).real() < es.eigenvalues()(b).real(); });
  for (int k = 0; k < 4; ++k) {
    r.eigenvalues.push_back(es.eigenvalues()(idx[k]).real());
    r.eigenvectors.col(k) = r.basis * es.eigenvectors().col(idx[k]).real();
  }
  return r;
}

// Integrates the seed and its rescaling by mu; returns the largest relative mismatch
// |mu^{-1} x_mu(mu t) - x(t)| / max(1, |x(t)|) over `checks` sample times.
inline double check_scaling_symmetry(const PhasePoint& seed, double lambda, double mu, double t_end,
                                     IntegratorConfig cfg = {}, int checks = 50) {
  if (!(mu > 0.0)) throw DomainError("check_scaling_symmetry: mu must be positive");
  if (!(t_end > seed.t)) throw DomainError("check_scaling_symmetry: t_end must exceed the seed time");
  std::vector<double> ts;
  for (int k = 1; k <= checks; ++k) ts.push_back(seed.t + (t_end - seed.t) * k / checks);
  cfg.t_max = t_end;
  cfg.output_times = ts;
  auto a = integrate(seed, lambda, cfg);
  auto rs = rescale(seed, mu, lambda);
  IntegratorConfig cfg2 = cfg;
  cfg2.t_max = mu * t_end;
  cfg2.blowup_threshold = mu * cfg.blowup_threshold;
  cfg2.output_times.clear();
  for (double t : ts) cfg2.output_times.push_back(mu * t);
  auto b = integrate(rs.point, rs.lambda, cfg2);
  if (b.t_end() < cfg2.t_max * (1 - 1e-12) || a.t_end() < t_end * (1 - 1e-12))
    throw Error("check_scaling_symmetry: a run terminated early");

  auto find = [](const Trajectory& tr, double t) {
    for (const auto& s : tr.samples)
      if (std::abs(s.p.t - t) <= 1e-12 * std::max(1.0, t)) return s.p;
    return tr.interpolate(t);
  };
  double dev = 0.0;
  for (double t : ts) {
    auto p = find(a, t);
    auto q = find(b, mu * t);
    for (int i = 0; i < 3; ++i) {
      dev = std::max(dev, std::abs(q.f[i] / mu - p.f[i]) / std::max(1.0, std::abs(p.f[i])));
      dev = std::max(dev, std::abs(q.tau[i] / mu - p.tau[i]) / std::max(1.0, std::abs(p.tau[i])));
    }
  }
  return dev;
}

struct RegionReport {
  bool entered_upper = false;  // Lambda > D > 1
  bool upper_preserved = true;
  bool entered_lower = false;  // Lambda < 1
  bool lower_preserved = true;
  double max_abs_lambda_minus_1 = 0.0;
  double max_abs_d_minus_1 = 0.0;
  double first_violation = NAN;
  double min_growth_margin = NAN;  // min of d/dt ln(Lambda - 1) - tanh(t/2) where Lambda > D > 1
};

// Lambda and D along a steady run, normalised to c = 3 by the scaling symmetry.
inline RegionReport check_preserved_regions(const Trajectory& tr, double c, double margin = 1e-9) {
  if (!(c > 0.0)) throw DomainError("check_preserved_regions: requires c > 0");
  const double mu = 3.0 / c;
  RegionReport r;
  for (const auto& s : tr.samples) {
    const double L = s.obs.Lambda / (mu * mu), D = s.obs.D / mu;
    if (L > D + margin && D > 1.0 + margin) {
      const double F1 = to_poly(s.p).F[0] / mu;
      const double m = rhs_lambda_d(L, D, F1)[1] / (L - 1.0) - std::tanh(mu * s.p.t / 2.0);
      r.min_growth_margin = std::isnan(r.min_growth_margin) ? m : std::min(r.min_growth_margin, m);
    }
    r.max_abs_lambda_minus_1 = std::max(r.max_abs_lambda_minus_1, std::abs(L - 1.0));
    r.max_abs_d_minus_1 = std::max(r.max_abs_d_minus_1, std::abs(D - 1.0));
    const bool upper = L > D + margin && D > 1.0 + margin;
    const bool lower = L < 1.0 - margin;
    if (r.entered_upper && !(L >= D - margin && D >= 1.0 - margin) && r.upper_preserved) {
      r.upper_preserved = false;
      if (std::isnan(r.first_violation)) r.first_violation = s.p.t;
    }
    if (r.entered_lower && !(L <= 1.0 + margin) && r.lower_preserved) {
      r.lower_preserved = false;
      if (std::isnan(r.first_violation)) r.first_violation = s.p.t;
    }
    r.entered_upper = r.entered_upper || upper;
    r.entered_lower = r.entered_lower || lower;
  }
  return r;
}

}  // namespace g2s
