// Seeds the b = sqrt(2), c = 3 steady soliton from its power series, integrates it,
// and prints the deviation from the closed form along the way.

#include <cstdio>

#include <g2soliton/g2soliton.hpp>

int main() {
  g2s::SolveOptions opt;
  opt.integrator.t_max = 10.0;
  opt.integrator.output_times = {1.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  auto tr = g2s::solve_closure({0.0, std::sqrt(2.0), 3.0}, opt);

  std::printf("%6s %14s %14s %10s\n", "t", "f1", "u", "rel.err");
  for (double t : opt.integrator.output_times) {
    auto p = tr.interpolate(t);
    auto exact = g2s::explicit_steady(t);
    double err = 0.0;
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(p.f[i] / exact.point.f[i] - 1.0));
    std::printf("%6.2f %14.10f %14.10f %10.2e\n", t, p.f[0], g2s::recover_u(p, 0.0), err);
  }
  for (const auto& e : tr.events) std::printf("event %s at t = %.12f\n", g2s::to_string(e.kind), e.t);
  auto verdict = g2s::classify_end(g2s::solve_closure({0.0, 1.6, 3.0}));
  std::printf("b = 1.6, c = 3: %s, rate %.3f\n", g2s::to_string(verdict.kind), verdict.rate);
}
