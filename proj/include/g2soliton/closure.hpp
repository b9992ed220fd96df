#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "domain.hpp"
#include "power_series.hpp"
#include "systems.hpp"

namespace g2s {

struct SeedError : Error {
  using Error::Error;
};

inline constexpr std::array<const char*, 8> kSeriesComponents = {"f1",   "f2",   "f3",     "tau1",
                                                                  "tau2", "tau3", "taubar", "u"};

// Truncated Taylor expansion at t = 0 of a smoothly-closing solution.
// coeff[j][k] is the t^k coefficient of component kSeriesComponents[j].
struct SeriesSolution {
  ClosureParams params;
  Group group = Group::SU3;
  int order = 0;
  std::array<std::vector<double>, 8> coeff;

  PhasePoint evaluate(double t) const {
    PhasePoint p;
    p.t = t;
    for (int i = 0; i < 3; ++i) {
      p.f[i] = horner(coeff[i], t);
      p.tau[i] = horner(coeff[3 + i], t);
    }
    return p;
  }

  Derivative<double> derivative(double t) const {
    Derivative<double> d;
    for (int i = 0; i < 3; ++i) {
      d.df[i] = horner_derivative(coeff[i], t);
      d.dtau[i] = horner_derivative(coeff[3 + i], t);
    }
    return d;
  }

  double u(double t) const { return horner(coeff[7], t); }

  double coefficient(const std::string& component, int degree) const {
    auto it = std::find(kSeriesComponents.begin(), kSeriesComponents.end(), component);
    if (it == kSeriesComponents.end()) throw DomainError("unknown series component " + component);
    const auto& a = coeff[it - kSeriesComponents.begin()];
    return degree >= 0 && degree < static_cast<int>(a.size()) ? a[degree] : 0.0;
  }
};

namespace detail {

// Unknowns y = (fh1, fh2, fh3, th2, th3) with
//   f1 = t + t^3 fh1, f2 = b + t fh2, f3 = b + t fh3, tau2 = c + t th2, tau3 = -c + t th3,
// and tau1 fixed by the constraint. The system becomes t y' = G(t, y) with G analytic.
template <typename T>
struct ClosureFields {
  BasicSeries<T> f1, f2, f3, tau1, tau2, tau3, taubar, u;
  std::array<BasicSeries<T>, 5> G;
};

template <typename T>
ClosureFields<T> closure_fields(const ClosureParams& cp, const std::array<BasicSeries<T>, 5>& y) {
  using Series = BasicSeries<T>;
  const T b = cp.b, c = cp.c, lam = cp.lambda;
  const std::size_t n = y[0].size();
  const Series t = Series::variable(n);
  const Series& fh1 = y[0];
  const Series& fh2 = y[1];
  const Series& fh3 = y[2];
  const Series& th2 = y[3];
  const Series& th3 = y[4];

  ClosureFields<T> o;
  Series a = T(1) + t * t * fh1;
  o.f1 = t * a;
  o.f2 = b + t * fh2;
  o.f3 = b + t * fh3;
  o.tau2 = c + t * th2;
  o.tau3 = -c + t * th3;
  Series f22 = o.f2 * o.f2, f32 = o.f3 * o.f3, f2f3 = o.f2 * o.f3;
  Series sum23 = 2.0 * b + t * (fh2 + fh3);
  Series Q = c * (fh3 - fh2) * sum23 + th2 * f32 + th3 * f22;
  Series rho = -(Q / (f22 * f32));  // tau1 / (t f1^2)
  Series rho1 = t * rho;            // tau1 / f1^2
  o.tau1 = o.f1 * o.f1 * rho1;
  Series B = th2 + th3 + t * t * a * a * rho;  // taubar / t
  o.taubar = t * B;
  Series f12 = o.f1 * o.f1;
  Series fb = f12 + f22 + f32;
  Series P = t * a * f2f3;
  o.u = t * (B - 2.0 * lam * a * f2f3) / fb;

  o.G[0] = -3.0 * fh1 + ((fh2 - fh3) * (fh2 - fh3) - a * a) / (2.0 * f2f3) - a * Q / (2.0 * f22 * f32);
  Series N2 = t * a * a + (fh3 - fh2) * sum23;
  Series N3 = t * a * a + (fh2 - fh3) * sum23;
  o.G[1] = o.tau2 / (2.0 * o.f2) + N2 / (2.0 * a * o.f3) - fh2;
  o.G[2] = o.tau3 / (2.0 * o.f3) + N3 / (2.0 * a * o.f2) - fh3;

  Series nt = rho1 * rho1 + o.tau2 * o.tau2 / (f22 * f22) + o.tau3 * o.tau3 / (f32 * f32);
  Series Bn = B / (a * f2f3);  // taubar / P
  auto dtau = [&](const Series& fi2, const Series& taui) {
    Series S = 3.0 * fi2 - fb - 1.5 * P * taui / fi2;
    return ((4.0 * lam / 3.0) * fi2 * S + o.taubar * taui - 2.0 * fi2 * fi2 * Bn) / fb + nt * fi2 / 3.0;
  };
  o.G[3] = dtau(f22, o.tau2) - th2;
  o.G[4] = dtau(f32, o.tau3) - th3;
  return o;
}

template <typename T = double>
std::array<T, 5> closure_leading(const ClosureParams& cp) {
  const T b = cp.b, c = cp.c, lam = cp.lambda;
  const T b2 = b * b;
  const T th = 2 * (lam * b2 + c * c / b2) / 9;
  return {-1 / (6 * b2) - 2 * lam / 27 + c * c / (18 * b2 * b2), c / (6 * b), -c / (6 * b), th, th};
}

// Solves (n Id - dM_{-1}) x = r using the block structure of closure_recursion_matrix.
template <typename T>
std::array<T, 5> solve_recursion(const ClosureParams& cp, int n, const std::array<T, 5>& r) {
  const T b = cp.b, c = cp.c, b2 = b * b, b3 = b2 * b;
  const T d = n + 2;
  const T det2 = d * d - 1;
  std::array<T, 5> x;
  x[1] = (d * r[1] + r[2]) / det2;
  x[2] = (r[1] + d * r[2]) / det2;
  x[3] = (d * r[3] - r[4]) / det2;
  x[4] = (d * r[4] - r[3]) / det2;
  x[0] = (r[0] + 4 * c * (x[1] - x[2]) / (3 * b3) - (x[3] + x[4]) / (2 * b2)) / (n + 3);
  return x;
}

// Coefficients of the eight physical components to degree `order`.
template <typename T>
std::array<std::vector<T>, 8> series_coefficients(const ClosureParams& cp, Group group, int order) {
  using Series = BasicSeries<T>;
  const std::size_t n = static_cast<std::size_t>(order);  // unknowns to degree order-1
  std::array<Series, 5> y;
  auto y0 = closure_leading<T>(cp);
  for (int j = 0; j < 5; ++j) y[j] = Series(n, y0[j]);

  for (std::size_t h = 1; h < n; ++h) {
    std::array<Series, 5> ys;
    for (int j = 0; j < 5; ++j) {
      ys[j] = Series(h + 1);
      for (std::size_t k = 0; k < h; ++k) ys[j][k] = y[j][k];
    }
    auto g0 = closure_fields<T>(cp, ys).G;
    std::array<T, 5> rhs;
    for (int i = 0; i < 5; ++i) rhs[i] = g0[i][h];
    auto sol = solve_recursion<T>(cp, static_cast<int>(h), rhs);
    for (int j = 0; j < 5; ++j) y[j][h] = sol[j];
  }
  if (group == Group::Sp2) {
    y[2] = y[1];
    y[4] = y[3];
  }

  // Re-expand the physical components to degree `order`.
  std::array<Series, 5> yx;
  for (int j = 0; j < 5; ++j) {
    yx[j] = Series(n + 1);
    for (std::size_t k = 0; k < n; ++k) yx[j][k] = y[j][k];
  }
  auto o = closure_fields<T>(cp, yx);
  const Series* comps[8] = {&o.f1, &o.f2, &o.f3, &o.tau1, &o.tau2, &o.tau3, &o.taubar, &o.u};
  std::array<std::vector<T>, 8> out;
  for (int j = 0; j < 8; ++j) out[j] = comps[j]->coefficients();
  return out;
}

}  // namespace detail

// Linear operator n Id - dM_{-1} of the order-n recursion, in closed form.
inline Eigen::Matrix<double, 5, 5> closure_recursion_matrix(const ClosureParams& cp, int n) {
  const double b = cp.b, c = cp.c, b2 = b * b, b3 = b2 * b;
  Eigen::Matrix<double, 5, 5> m;
  m << n + 3, -4 * c / (3 * b3), 4 * c / (3 * b3), 1 / (2 * b2), 1 / (2 * b2),  //
      0, n + 2, -1, 0, 0,                                                        //
      0, -1, n + 2, 0, 0,                                                        //
      0, 0, 0, n + 2, 1,                                                         //
      0, 0, 0, 1, n + 2;
  return m;
}

// The same matrix assembled from the affine dependence of the truncated RHS on the order-n data.
inline Eigen::Matrix<double, 5, 5> assembled_recursion_matrix(const ClosureParams& cp, int n) {
  if (n < 1) throw DomainError("assembled_recursion_matrix: n must be positive");
  auto y0 = detail::closure_leading(cp);
  std::array<Series, 5> ys;
  for (int j = 0; j < 5; ++j) ys[j] = Series(n + 1, y0[j]);
  auto g0 = detail::closure_fields(cp, ys).G;
  Eigen::Matrix<double, 5, 5> A;
  for (int j = 0; j < 5; ++j) {
    auto yj = ys;
    yj[j][n] = 1.0;
    auto gj = detail::closure_fields(cp, yj).G;
    for (int i = 0; i < 5; ++i) A(i, j) = (i == j ? double(n) : 0.0) - (gj[i][n] - g0[i][n]);
  }
  return A;
}

// Value of G(0, y0) at the leading data; zero on the smooth-closure branch.
inline std::array<double, 5> closure_leading_residual(const ClosureParams& cp) {
  auto y0 = detail::closure_leading(cp);
  std::array<Series, 5> y;
  for (int j = 0; j < 5; ++j) y[j] = Series(1, y0[j]);
  auto o = detail::closure_fields(cp, y);
  return {o.G[0][0], o.G[1][0], o.G[2][0], o.G[3][0], o.G[4][0]};
}

// Order-by-order solution of the regular singular initial value problem.
// At order n the unknown coefficient solves (n Id - dM_{-1}) y_n = G_n(y_0..y_{n-1}),
// whose matrix has the closed form closure_recursion_matrix.
inline SeriesSolution build_series(const ClosureParams& cp, Group group = Group::SU3, int order = 20) {
  if (!(cp.b > 0.0)) throw DomainError("build_series: b must be positive");
  if (order < 3) throw DomainError("build_series: order must be at least 3");
  if (group == Group::Sp2 && cp.c != 0.0) throw DomainError("build_series: Sp2 closure requires c = 0");

  SeriesSolution s;
  s.params = cp;
  s.group = group;
  s.order = order;
  s.coeff = detail::series_coefficients<double>(cp, group, order);
  return s;
}

struct AppendixEntry {
  std::string component;
  int degree;
  double value;
};

// Low-order closed-form coefficients of the smoothly-closing solutions (general lambda).
inline std::vector<AppendixEntry> appendix_oracle(const ClosureParams& cp) {
  const double L = cp.lambda, b = cp.b, c = cp.c;
  if (!(b > 0.0)) throw DomainError("appendix_oracle: b must be positive");
  const double b2 = b * b, b4 = b2 * b2, b6 = b4 * b2, b8 = b4 * b4, c2 = c * c, c4 = c2 * c2, L2 = L * L;
  const double f1_3 = -(4 * L * b4 + 9 * b2 - 3 * c2) / (54 * b4);
  const double f1_5 = (464 * b8 * L2 + 2844 * b6 * L - 972 * b4 * c2 * L + 4050 * b4 - 2322 * b2 * c2 + 321 * c4) /
                      (48600 * b8);
  const double f2_1 = c / (6 * b);
  const double f2_2 = (4 * L * b4 + 18 * b2 - c2) / (72 * b2 * b);
  const double f2_3 = -c * (152 * L * b4 + 126 * b2 - 63 * c2) / (6480 * b4 * b);
  const double t1_3 = -2 * (2 * L * b4 - c2) / (9 * b4);
  const double t1_5 = 2 * (26 * b8 * L2 + 81 * b6 * L - 40 * b4 * c2 * L - 54 * b2 * c2 + 12 * c4) / (405 * b8);
  const double t2_1 = 2 * (L * b4 + c2) / (9 * b2);
  const double t2_2 = -c * (5 * L * b4 - 4 * c2) / (54 * b4);
  const double t2_3 = -(8 * b8 * L2 + 18 * b6 * L + 92 * b4 * c2 * L + 99 * b2 * c2 - 42 * c4) / (1215 * b6);
  const double tb_1 = 4 * (L * b4 + c2) / (9 * b2);
  const double tb_3 = -4 * (4 * b8 * L2 + 144 * b6 * L + 46 * b4 * c2 * L - 18 * b2 * c2 - 21 * c4) / (1215 * b6);
  const double u_1 = -(7 * L * b4 - 2 * c2) / (9 * b4);
  const double u_3 = 2 * (26 * b8 * L2 + 126 * b6 * L - 61 * b4 * c2 * L - 117 * b2 * c2 + 21 * c4) / (1215 * b8);
  return {{"f1", 1, 1.0},      {"f1", 3, f1_3},    {"f1", 5, f1_5},      {"f2", 0, b},       {"f2", 1, f2_1},
          {"f2", 2, f2_2},     {"f2", 3, f2_3},    {"f3", 0, b},         {"f3", 1, -f2_1},   {"f3", 2, f2_2},
          {"f3", 3, -f2_3},    {"tau1", 3, t1_3},  {"tau1", 5, t1_5},    {"tau2", 0, c},     {"tau2", 1, t2_1},
          {"tau2", 2, t2_2},   {"tau2", 3, t2_3},  {"tau3", 0, -c},      {"tau3", 1, t2_1},  {"tau3", 2, -t2_2},
          {"tau3", 3, t2_3},   {"taubar", 1, tb_1}, {"taubar", 3, tb_3}, {"u", 1, u_1},      {"u", 3, u_3}};
}

// Additional closed-form coefficients available in the steady case lambda = 0.
inline std::vector<AppendixEntry> appendix_oracle_steady(double b, double c) {
  if (!(b > 0.0)) throw DomainError("appendix_oracle_steady: b must be positive");
  const double b2 = b * b, b4 = b2 * b2, b6 = b4 * b2, b7 = b6 * b, b8 = b4 * b4, c2 = c * c, c4 = c2 * c2;
  auto e = appendix_oracle({0.0, b, c});
  const double f2_4 = (-2700 * b4 + 636 * b2 * c2 + 7 * c4) / (51840 * b7);
  const double t2_4 = -2 * c2 * c * (11 * b2 - 3 * c2) / (405 * b8);
  e.push_back({"f1", 5, (1350 * b4 - 774 * b2 * c2 + 107 * c4) / (16200 * b8)});
  e.push_back({"f2", 4, f2_4});
  e.push_back({"f3", 4, f2_4});
  e.push_back({"tau1", 5, 4 * c2 * (-9 * b2 + 2 * c2) / (135 * b8)});
  e.push_back({"tau2", 4, t2_4});
  e.push_back({"tau3", 4, -t2_4});
  e.push_back({"taubar", 3, 4 * c2 * (6 * b2 + 7 * c2) / (405 * b6)});
  e.push_back({"u", 3, 2 * c2 * (-39 * b2 + 7 * c2) / (405 * b8)});
  return e;
}

// Seed radius with estimated truncation error |a_N| t0^N <= target; falls back to 0.05 b.
inline double default_seed_time(const SeriesSolution& s, double target = 1e-12) {
  double aN = 0.0;
  for (int j = 0; j < 6; ++j) {
    const auto& a = s.coeff[j];
    for (int k = std::max(1, s.order - 1); k <= s.order && k < static_cast<int>(a.size()); ++k)
      aN = std::max(aN, std::abs(a[k]));
  }
  const double fallback = 0.05 * s.params.b;
  if (!(aN > 0.0) || !std::isfinite(aN)) return fallback;
  double t0 = std::pow(target / aN, 1.0 / s.order);
  if (!std::isfinite(t0) || t0 <= 0.0) return fallback;
  return std::min(t0, 0.25 * s.params.b);
}

// Evaluates the series at t0 > 0 and checks the constraint there.
inline PhasePoint seed_point(const SeriesSolution& s, double t0, double tolerance = 1e-10) {
  if (!(t0 > 0.0)) throw SeedError("seed_point: t0 must be positive");
  PhasePoint p = s.evaluate(t0);
  for (double x : p.f)
    if (!(x > 0.0)) throw SeedError("seed_point: t0 beyond the range of the series");
  double r = std::abs(relative_constraint_residual(p));
  if (!(r <= tolerance)) throw SeedError("seed_point: constraint residual " + std::to_string(r) + " exceeds tolerance");
  return p;
}

struct SeriesResidual {
  std::vector<double> t;
  std::vector<double> residual;  // max over components of |d/dt series - rhs|
  double fitted_order = NAN;     // slope of log residual against log t
};

inline SeriesResidual series_residual(const SeriesSolution& s, const std::vector<double>& ts) {
  SeriesResidual r;
  for (double t : ts) {
    auto p = s.evaluate(t);
    auto d = s.derivative(t);
    auto rhs = rhs_su3(p, s.params.lambda);
    double m = 0.0;
    for (int i = 0; i < 3; ++i) {
      m = std::max(m, std::abs(d.df[i] - rhs.df[i]));
      m = std::max(m, std::abs(d.dtau[i] - rhs.dtau[i]));
    }
    r.t.push_back(t);
    r.residual.push_back(m);
  }
  if (ts.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
      double x = std::log(r.t[k]), y = std::log(r.residual[k]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    r.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return r;
}

inline nlohmann::json series_to_json(const SeriesSolution& s) {
  nlohmann::json j;
  j["params"] = {{"lambda", s.params.lambda}, {"b", s.params.b}, {"c", s.params.c}, {"group", to_string(s.group)}};
  j["order"] = s.order;
  nlohmann::json coeffs = nlohmann::json::object();
  for (std::size_t m = 0; m < kSeriesComponents.size(); ++m) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t k = 0; k < s.coeff[m].size(); ++k)
      if (s.coeff[m][k] != 0.0) arr.push_back({static_cast<int>(k), s.coeff[m][k]});
    coeffs[kSeriesComponents[m]] = arr;
  }
  j["coefficients"] = coeffs;
  return j;
}

}  // namespace g2s
