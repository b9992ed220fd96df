#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "domain.hpp"
#include "systems.hpp"

namespace g2s {

using State = std::array<double, 6>;
// Extended precision keeps the time resolution needed to reach a collapsing coefficient.
using WideState = std::array<long double, 6>;

struct IntegratorConfig {
  double t_max = 1e4;
  double rtol = 1e-14;
  double atol = 1e-14;
  double blowup_threshold = 1e-6;  // absolute; closure runs use 1e-6 b
  double min_step_ratio = 1e-17;   // step collapse when dt < ratio * t
  std::size_t max_steps = 200000;
  std::vector<double> output_times;  // extra samples taken from the dense output
  bool record_steps = true;          // record every accepted step
};

enum class Termination { ReachedTmax, BlowUp, StepCollapse, MaxSteps, NonFinite };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedTmax: return "ReachedTmax";
    case Termination::BlowUp: return "BlowUp";
    case Termination::StepCollapse: return "StepCollapse";
    case Termination::MaxSteps: return "MaxSteps";
    default: return "NonFinite";
  }
}

enum class EventKind { F1EqualsF3, F1EqualsF2, BlowUp };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::F1EqualsF3: return "f1=f3";
    case EventKind::F1EqualsF2: return "f1=f2";
    default: return "blowup";
  }
}

struct Event {
  EventKind kind;
  double t;
  int component = -1;  // collapsing coefficient for BlowUp
};

struct Sample {
  PhasePoint p;
  Derivative<double> d;
  Observables obs;
};

struct Trajectory {
  double lambda = 0.0;
  std::vector<Sample> samples;
  std::vector<Event> events;
  Termination termination = Termination::ReachedTmax;
  std::size_t steps = 0;

  double t_end() const { return samples.empty() ? NAN : samples.back().p.t; }

  std::size_t count(EventKind k) const {
    return std::count_if(events.begin(), events.end(), [k](const Event& e) { return e.kind == k; });
  }

  // Cubic Hermite interpolation between stored samples.
  PhasePoint interpolate(double t) const {
    if (samples.empty() || t < samples.front().p.t || t > samples.back().p.t)
      throw DomainError("Trajectory::interpolate: t outside the integrated range");
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const Sample& s, double x) { return s.p.t < x; });
    if (it == samples.begin()) return it->p;
    const Sample& b = *it;
    const Sample& a = *(it - 1);
    const double h = b.p.t - a.p.t, s = (t - a.p.t) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s), h01 = s * s * (3 - 2 * s),
                 h11 = s * s * (s - 1);
    PhasePoint p;
    p.t = t;
    for (int i = 0; i < 3; ++i) {
      p.f[i] = h00 * a.p.f[i] + h10 * h * a.d.df[i] + h01 * b.p.f[i] + h11 * h * b.d.df[i];
      p.tau[i] = h00 * a.p.tau[i] + h10 * h * a.d.dtau[i] + h01 * b.p.tau[i] + h11 * h * b.d.dtau[i];
    }
    return p;
  }
};

inline State to_state(const PhasePoint& p) { return {p.f[0], p.f[1], p.f[2], p.tau[0], p.tau[1], p.tau[2]}; }

inline PhasePoint from_state(const State& x, double t) { return {t, {x[0], x[1], x[2]}, {x[3], x[4], x[5]}}; }

namespace detail {

template <typename X, typename W>
Sample make_sample(const X& x, const W& t, double lambda) {
  Sample s;
  s.p = {static_cast<double>(t),
         {static_cast<double>(x[0]), static_cast<double>(x[1]), static_cast<double>(x[2])},
         {static_cast<double>(x[3]), static_cast<double>(x[4]), static_cast<double>(x[5])}};
  s.d = rhs_su3<double>(s.p.f, s.p.tau, lambda);
  s.obs = observables(s.p, lambda);
  return s;
}

template <typename X>
bool finite_positive(const X& x) {
  for (const auto& v : x)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return x[0] > 0 && x[1] > 0 && x[2] > 0;
}

// Event-locating driver shared by the working precisions. The stepper exposes the
// dense-output interface of odeint (do_step, calc_state, current_time, ...).
template <typename X, typename Stepper>
Trajectory integrate_dense(Stepper& stepper, const X& x0, double t0, double lambda, const IntegratorConfig& cfg) {
  namespace odeint = boost::numeric::odeint;
  using W = std::decay_t<decltype(x0[0])>;
  using std::abs;
  Trajectory tr;
  tr.lambda = lambda;
  auto sys = [lambda](const X& x, X& dx, W) {
    auto d = rhs_su3<W>({x[0], x[1], x[2]}, {x[3], x[4], x[5]}, lambda);
    dx = {d.df[0], d.df[1], d.df[2], d.dtau[0], d.dtau[1], d.dtau[2]};
  };

  std::vector<double> outs;
  for (double t : cfg.output_times)
    if (t > t0 && t <= cfg.t_max) outs.push_back(t);
  std::sort(outs.begin(), outs.end());
  std::size_t next_out = 0;

  tr.samples.push_back(make_sample(x0, t0, lambda));
  X xprev = x0, xs = x0;
  W tprev = t0;
  const W tmax = cfg.t_max, thr = cfg.blowup_threshold;
  auto at = [&](const W& t) {
    stepper.calc_state(t, xs);
    return xs;
  };
  // Root of g on [tprev, hi]; `upper` returns the bracket end past the sign change.
  auto refine = [&](auto g, const W& hi, bool upper = false) {
    boost::uintmax_t it = 100;
    auto tol = boost::math::tools::eps_tolerance<W>(std::numeric_limits<W>::digits - 4);
    auto r = boost::math::tools::toms748_solve([&](const W& t) { return g(at(t)); }, tprev, hi, tol, it);
    return upper ? r.second : W((r.first + r.second) / 2);
  };

  while (true) {
    if (tr.steps >= cfg.max_steps) {
      tr.termination = Termination::MaxSteps;
      break;
    }
    try {
      stepper.do_step(sys);
    } catch (const odeint::step_adjustment_error&) {
      tr.termination = Termination::StepCollapse;
      break;
    }
    ++tr.steps;
    const W tcur = stepper.current_time();
    X xcur = stepper.current_state();
    W tstop = tcur < tmax ? tcur : tmax;
    if (tstop < tcur) xcur = at(tstop);

    // Collapse of a coefficient ends the run at the crossing time.
    int collapsing = -1;
    for (int k = 0; k < 3; ++k)
      if (!(xcur[k] > thr) && xprev[k] > thr) collapsing = k;
    W tblow = tstop;
    if (collapsing >= 0) {
      const int k = collapsing;
      tblow = refine([k, thr](const X& x) { return W(x[k] - thr); }, tstop, true);
      if (tblow < tstop) {
        tstop = tblow;
        xcur = at(tstop);
      } else {
        tblow = tstop;
      }
    } else if (!finite_positive(xcur)) {
      tr.termination = Termination::NonFinite;
      break;
    }

    auto check_crossing = [&](EventKind kind, int j) {
      const W g0 = xprev[0] - xprev[j], g1 = xcur[0] - xcur[j];
      if ((g0 < 0) != (g1 < 0) && g0 != 0) {
        const W te = g1 == 0 ? tstop : refine([j](const X& x) { return W(x[0] - x[j]); }, tstop);
        if (te <= tstop) tr.events.push_back({kind, static_cast<double>(te)});
      }
    };
    check_crossing(EventKind::F1EqualsF3, 2);
    check_crossing(EventKind::F1EqualsF2, 1);

    while (next_out < outs.size() && outs[next_out] <= tstop) {
      if (outs[next_out] > tprev) tr.samples.push_back(make_sample(at(W(outs[next_out])), outs[next_out], lambda));
      ++next_out;
    }
    if ((cfg.record_steps || collapsing >= 0 || tstop >= tmax) &&
        !(tr.samples.back().p.t >= static_cast<double>(tstop))) {
      if (finite_positive(xcur)) tr.samples.push_back(make_sample(xcur, tstop, lambda));
    }

    if (collapsing >= 0) {
      tr.events.push_back({EventKind::BlowUp, static_cast<double>(tblow), collapsing});
      tr.termination = Termination::BlowUp;
      break;
    }
    if (tstop >= tmax) {
      tr.termination = Termination::ReachedTmax;
      break;
    }
    if (stepper.current_time_step() < cfg.min_step_ratio * abs(tcur)) {
      tr.termination = Termination::StepCollapse;
      break;
    }
    xprev = xcur;
    tprev = tcur;
  }
  std::sort(tr.events.begin(), tr.events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  return tr;
}

}  // namespace detail

// Adaptive Dormand-Prince integration of the first-order system from `seed`, with
// location of f1 = f3, f1 = f2 crossings and of the collapse f_k <= blowup_threshold.
inline Trajectory integrate(const PhasePoint& seed, double lambda, const IntegratorConfig& cfg = {}) {
  namespace odeint = boost::numeric::odeint;
  require_positive(seed.f, "integrate");
  if (!(cfg.t_max > seed.t)) throw DomainError("integrate: t_max must exceed the seed time");

  using Stepper = odeint::runge_kutta_dopri5<WideState, long double, WideState, long double>;
  auto stepper = odeint::make_dense_output(static_cast<long double>(cfg.atol), static_cast<long double>(cfg.rtol), Stepper());
  WideState x0;
  for (int i = 0; i < 6; ++i) x0[i] = i < 3 ? seed.f[i] : seed.tau[i - 3];
  stepper.initialize(x0, static_cast<long double>(seed.t), 1e-3L * std::max(seed.t, 1e-3));
  return detail::integrate_dense(stepper, x0, seed.t, lambda, cfg);
}

}  // namespace g2s
