// Command-line front end: integrate, classify, oracle-check, boundary, series.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <g2soliton/g2soliton.hpp>
#include <g2soliton/quad.hpp>

using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kBlowUp = 2, kOracleFailure = 3 };

// Reads {"<subcommand>": {"<flag>": value, ...}, ...}; flags given on the command line win.
class ConfigJSON : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> out;
    collect(j, "", {}, out);
    return out;
  }

 private:
  static void collect(const json& j, const std::string& name, std::vector<std::string> prefix,
                      std::vector<CLI::ConfigItem>& out) {
    if (j.is_object()) {
      if (!name.empty()) prefix.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) collect(*it, it.key(), prefix, out);
      return;
    }
    if (name.empty()) throw CLI::ConversionError("config file must be a JSON object");
    CLI::ConfigItem item;
    item.name = name;
    item.parents = prefix;
    auto scalar = [](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      return v.dump();
    };
    if (j.is_array())
      for (const auto& v : j) item.inputs.push_back(scalar(v));
    else
      item.inputs.push_back(scalar(j));
    out.push_back(item);
  }
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw g2s::Error("cannot open output file " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

g2s::Group parse_group(const std::string& g) {
  if (g == "SU3" || g == "su3") return g2s::Group::SU3;
  if (g == "Sp2" || g == "sp2") return g2s::Group::Sp2;
  throw CLI::ValidationError("--group", "must be SU3 or Sp2");
}

const std::vector<std::string> kColumns = {"t",  "f1", "f2",     "f3", "tau1",      "tau2",  "tau3",       "u",
                                           "g",  "F1", "F2",     "F3", "Lambda",    "D",     "normTauSq",  "scalR",
                                           "clResidual", "constraintResidual"};

std::vector<double> row_values(const g2s::Sample& s) {
  auto F = g2s::to_poly(s.p).F;
  const auto& o = s.obs;
  return {s.p.t,      s.p.f[0],   s.p.f[1],  s.p.f[2],    s.p.tau[0], s.p.tau[1],        s.p.tau[2],
          o.u,        std::cbrt(o.volume),   F[0],        F[1],       F[2],              o.Lambda,
          o.D,        o.normTauSq,           o.scalarCurvature,       o.clResidual,      o.constraintResidual};
}

constexpr double kQualityBound = 1e-6;

void write_trajectory(std::ostream& os, const g2s::Trajectory& tr, const g2s::ClosureParams& cp, bool as_json) {
  bool flagged = false;
  for (const auto& s : tr.samples) flagged = flagged || !(std::abs(s.obs.constraintResidual) <= kQualityBound);
  if (as_json) {
    json j;
    j["params"] = {{"lambda", cp.lambda}, {"b", cp.b}, {"c", cp.c}};
    j["termination"] = g2s::to_string(tr.termination);
    j["events"] = json::array();
    for (const auto& e : tr.events) j["events"].push_back({{"kind", g2s::to_string(e.kind)}, {"t", e.t}});
    json cols = json::object();
    for (const auto& c : kColumns) cols[c] = json::array();
    if (flagged) cols["qualityFlag"] = json::array();
    for (const auto& s : tr.samples) {
      auto v = row_values(s);
      for (std::size_t k = 0; k < kColumns.size(); ++k) cols[kColumns[k]].push_back(v[k]);
      if (flagged) cols["qualityFlag"].push_back(std::abs(s.obs.constraintResidual) <= kQualityBound ? 0 : 1);
    }
    j["columns"] = cols;
    os << j.dump(1) << '\n';
    return;
  }
  for (std::size_t k = 0; k < kColumns.size(); ++k) os << (k ? "," : "") << kColumns[k];
  if (flagged) os << ",qualityFlag";
  os << '\n';
  for (const auto& s : tr.samples) {
    auto v = row_values(s);
    for (std::size_t k = 0; k < v.size(); ++k) os << (k ? "," : "") << fmt17(v[k]);
    if (flagged) os << ',' << (std::abs(s.obs.constraintResidual) <= kQualityBound ? 0 : 1);
    os << '\n';
  }
}

struct IntegrateArgs {
  double lambda = 0.0, b = 1.0, c = 0.0;
  std::string group = "SU3";
  double tmax = 50.0;
  double t0 = 0.0;
  int order = 20;
  double rtol = 1e-14, atol = 1e-14;
  double dt = 0.0;
  std::size_t max_steps = 200000;
  std::string precision = "extended";
  double quad_tol = 1e-26;
  std::string format = "csv";
  std::string out;
};

int cmd_integrate(const IntegrateArgs& a) {
  g2s::ClosureParams cp{a.lambda, a.b, a.c};
  g2s::SolveOptions opt;
  opt.group = parse_group(a.group);
  opt.order = a.order;
  if (a.t0 > 0.0) opt.t0 = a.t0;
  opt.integrator.t_max = a.tmax;
  opt.integrator.rtol = a.rtol;
  opt.integrator.atol = a.atol;
  opt.integrator.max_steps = a.max_steps;
  if (a.dt > 0.0) {
    opt.integrator.record_steps = false;
    for (double t = a.dt; t <= a.tmax * (1 + 1e-14); t += a.dt) opt.integrator.output_times.push_back(t);
  }
  auto tr = a.precision == "quad" ? g2s::solve_closure_quad(cp, opt, {a.quad_tol}) : g2s::solve_closure(cp, opt);
  Output out(a.out);
  write_trajectory(out.stream(), tr, cp, a.format == "json");
  std::cerr << "termination " << g2s::to_string(tr.termination) << " at t=" << fmt17(tr.t_end()) << ", "
            << tr.steps << " steps\n";
  for (const auto& e : tr.events) std::cerr << "event " << g2s::to_string(e.kind) << " t=" << fmt17(e.t) << '\n';
  return tr.termination == g2s::Termination::BlowUp ? kBlowUp : kOk;
}

struct ClassifyArgs {
  std::vector<double> b, c, b_range, c_range;
  double tmax = 1e4;
  std::string format = "csv";
  std::string out;
};

std::vector<double> expand_range(const std::vector<double>& r, const char* flag) {
  if (r.empty()) return {};
  if (r.size() != 3 || r[2] < 1 || r[2] != std::floor(r[2]))
    throw CLI::ValidationError(flag, "expects lo,hi,n with integer n >= 1");
  const int n = static_cast<int>(r[2]);
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(n == 1 ? r[0] : r[0] + (r[1] - r[0]) * k / (n - 1));
  return v;
}

int cmd_classify(const ClassifyArgs& a) {
  auto bs = a.b, cs = a.c;
  for (double x : expand_range(a.b_range, "--b-range")) bs.push_back(x);
  for (double x : expand_range(a.c_range, "--c-range")) cs.push_back(x);
  std::vector<std::pair<double, double>> grid;
  for (double c : cs)
    for (double b : bs) grid.emplace_back(b, c);
  if (grid.empty()) throw g2s::DomainError("classify: empty parameter grid (give --b/--b-range and --c/--c-range)");
  g2s::SolveOptions opt;
  opt.integrator.t_max = a.tmax;
  auto rows = g2s::classify_steady_params(grid, opt);
  Output out(a.out);
  if (a.format == "json") {
    json j = json::array();
    for (const auto& r : rows) {
      json row = {{"b", r.b},
                  {"c", r.c},
                  {"numerical", g2s::to_string(r.numerical.kind)},
                  {"analytic", g2s::to_string(r.analytic)},
                  {"agree", r.agree}};
      row["rate"] = std::isnan(r.numerical.rate) ? json(nullptr) : json(r.numerical.rate);
      row["blowupTime"] = std::isnan(r.numerical.blowup_time) ? json(nullptr) : json(r.numerical.blowup_time);
      if (!r.numerical.reason.empty()) row["reason"] = r.numerical.reason;
      j.push_back(row);
    }
    out.stream() << j.dump(1) << '\n';
  } else {
    out.stream() << "b,c,numerical,analytic,agree,rate,blowupTime\n";
    for (const auto& r : rows)
      out.stream() << fmt17(r.b) << ',' << fmt17(r.c) << ',' << g2s::to_string(r.numerical.kind) << ','
                   << g2s::to_string(r.analytic) << ',' << (r.agree ? "true" : "false") << ','
                   << (std::isnan(r.numerical.rate) ? "" : fmt17(r.numerical.rate)) << ','
                   << (std::isnan(r.numerical.blowup_time) ? "" : fmt17(r.numerical.blowup_time)) << '\n';
  }
  return kOk;
}

struct Check {
  std::string name;
  double value;
  double tolerance;
  std::string detail;
  bool pass() const { return value <= tolerance; }
};

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(lo + (hi - lo) * k / (n - 1));
  return v;
}

// Fault name "appendix:<component>:<degree>" scales that generated coefficient by 1 + 1e-6.
std::vector<Check> run_oracle_checks(const std::string& fault) {
  std::vector<Check> checks;
  const auto ts = grid(0.1, 20.0, 400);
  checks.push_back({"oracle:cone", g2s::oracle_residual(g2s::Oracle::Cone, ts, -1.0).max_residual, 1e-10, ""});
  checks.push_back(
      {"oracle:explicit-steady", g2s::oracle_residual(g2s::Oracle::ExplicitSteady, ts).max_residual, 1e-10, ""});
  for (double b : {0.5, 1.0, 2.0})
    checks.push_back({"oracle:shrinker(b=" + fmt17(b) + ")",
                      g2s::oracle_residual(g2s::Oracle::ExplicitShrinker, ts, b).max_residual, 1e-10, ""});
  checks.push_back({"oracle:bryant-salamon",
                    g2s::oracle_residual(g2s::Oracle::BryantSalamon, grid(1.01, 20.0, 400), 1.0).max_residual, 1e-10,
                    ""});

  std::string fc;
  int fd = -1;
  if (!fault.empty()) {
    auto p1 = fault.find(':'), p2 = fault.rfind(':');
    if (fault.rfind("appendix:", 0) != 0 || p1 == p2) throw g2s::DomainError("unknown fault " + fault);
    fc = fault.substr(p1 + 1, p2 - p1 - 1);
    fd = std::stoi(fault.substr(p2 + 1));
  }
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> ul(-2.0, 2.0), ub(0.5, 2.5), uc(-3.0, 3.0);
  double worst = 0.0;
  std::string where;
  bool fault_hit = false;
  for (int k = 0; k < 20; ++k) {
    g2s::ClosureParams cp{ul(rng), ub(rng), uc(rng)};
    auto s = g2s::build_series(cp);
    for (const auto& e : g2s::appendix_oracle(cp)) {
      double v = s.coefficient(e.component, e.degree);
      if (e.component == fc && e.degree == fd) {
        v *= 1.0 + 1e-6;
        fault_hit = true;
      }
      double rel = std::abs(v - e.value) / std::max(std::abs(e.value), 1e-300);
      if (e.value == 0.0) rel = std::abs(v);
      if (rel > worst) {
        worst = rel;
        where = "appendix:" + e.component + ":" + std::to_string(e.degree);
      }
    }
  }
  if (!fault.empty() && !fault_hit) throw g2s::DomainError("fault names no appendix coefficient: " + fault);
  checks.push_back({worst > 1e-12 ? where : "appendix", worst, 1e-12, "worst " + where});

  auto cone = g2s::cone_linearization();
  const double expect[4] = {-2.0, -2.0, -0.5, -0.5};
  double dev = 0.0;
  for (int k = 0; k < 4; ++k) dev = std::max(dev, std::abs(cone.eigenvalues[k] - expect[k]));
  checks.push_back({"cone-linearization", dev, 1e-12, "spectrum {-2,-2,-1/2,-1/2}"});

  auto fps = g2s::poly_fixed_points(3.0);
  double pdev = 0.0;
  const auto& e = fps.at(1);
  pdev = std::max(pdev, std::abs(e.point[0] - 1) + std::abs(e.point[1] - 1) + std::abs(e.point[2]));
  const double ev[3] = {1.0, -1.0, -2.0};
  for (int k = 0; k < 3; ++k) pdev = std::max(pdev, std::abs(e.eigenvalues[k] - ev[k]));
  if (!e.stable_plane_normal) pdev = INFINITY;
  else
    for (double x : *e.stable_plane_normal) pdev = std::max(pdev, std::abs(x - 1 / std::sqrt(3.0)));
  checks.push_back({"poly-fixed-points", pdev, 1e-10, "(1,1,0): eigenvalues {1,-1,-2}, normal (1,1,1)/sqrt(3)"});
  return checks;
}

int cmd_oracle_check(bool as_json, const std::string& fault) {
  auto checks = run_oracle_checks(fault);
  bool ok = true;
  for (const auto& c : checks) ok = ok && c.pass();
  if (as_json) {
    json j;
    j["pass"] = ok;
    j["checks"] = json::array();
    for (const auto& c : checks)
      j["checks"].push_back(
          {{"name", c.name}, {"pass", c.pass()}, {"value", c.value}, {"tolerance", c.tolerance}, {"detail", c.detail}});
    std::cout << j.dump(1) << '\n';
  } else {
    for (const auto& c : checks)
      std::cout << (c.pass() ? "PASS " : "FAIL ") << c.name << " value=" << fmt17(c.value)
                << " tol=" << fmt17(c.tolerance) << '\n';
  }
  for (const auto& c : checks)
    if (!c.pass()) std::cerr << "failed: " << c.name << '\n';
  return ok ? kOk : kOracleFailure;
}

struct BoundaryArgs {
  std::optional<double> b, c, blo, bhi, clo, chi;
  double tol = 1e-3;
  bool as_json = false;
};

int cmd_boundary(const BoundaryArgs& a) {
  g2s::BoundaryResult r;
  std::string axis;
  if (a.c && a.blo && a.bhi) {
    r = g2s::find_boundary_b(*a.c, *a.blo, *a.bhi, a.tol);
    axis = "b";
  } else if (a.b && a.clo && a.chi) {
    r = g2s::find_boundary_c(*a.b, *a.clo, *a.chi, a.tol);
    axis = "c";
  } else {
    throw CLI::ValidationError("boundary", "give --c with --blo/--bhi, or --b with --clo/--chi");
  }
  const double diff = std::abs(r.estimate - r.reference);
  if (a.as_json) {
    json j = {{"axis", axis},       {"estimate", r.estimate},     {"lo", r.lo},       {"hi", r.hi},
              {"width", r.hi - r.lo}, {"reference", r.reference}, {"difference", diff}, {"probes", r.probes}};
    std::cout << j.dump(1) << '\n';
  } else {
    std::cout << axis << "* estimate " << fmt17(r.estimate) << "\nbracket [" << fmt17(r.lo) << ", " << fmt17(r.hi)
              << "] width " << fmt17(r.hi - r.lo) << "\nreference (c^2/b^2 = 9/2) " << fmt17(r.reference)
              << "\n|estimate - reference| " << fmt17(diff) << '\n';
  }
  return kOk;
}

struct SeriesArgs {
  double lambda = 0.0, b = 1.0, c = 0.0;
  std::string group = "SU3";
  int order = 20;
  std::string out;
};

int cmd_series(const SeriesArgs& a) {
  auto s = g2s::build_series({a.lambda, a.b, a.c}, parse_group(a.group), a.order);
  Output out(a.out);
  out.stream() << g2s::series_to_json(s).dump(1) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cohomogeneity-one G2 Laplacian soliton lab"};
  app.config_formatter(std::make_shared<ConfigJSON>());
  app.set_config("--config", "", "JSON config: {\"<subcommand>\": {\"<flag>\": value}}");
  app.require_subcommand(1);

  IntegrateArgs ia;
  auto* integ = app.add_subcommand("integrate", "integrate a smoothly-closing solution and write samples");
  integ->add_option("--lambda", ia.lambda, "soliton constant");
  integ->add_option("--b", ia.b, "size of the singular orbit")->check(CLI::PositiveNumber);
  integ->add_option("--c", ia.c, "torsion parameter");
  integ->add_option("--group", ia.group, "SU3 or Sp2");
  integ->add_option("--tmax", ia.tmax, "final time")->check(CLI::PositiveNumber);
  integ->add_option("--t0", ia.t0, "seed time (default: from the series)")->check(CLI::NonNegativeNumber);
  integ->add_option("--order", ia.order, "series order")->check(CLI::Range(3, 200));
  integ->add_option("--rtol", ia.rtol)->check(CLI::PositiveNumber);
  integ->add_option("--atol", ia.atol)->check(CLI::PositiveNumber);
  integ->add_option("--dt", ia.dt, "uniform output spacing (default: every step)")->check(CLI::NonNegativeNumber);
  integ->add_option("--max-steps", ia.max_steps);
  integ->add_option("--precision", ia.precision, "extended (long double) or quad (binary128)")
      ->check(CLI::IsMember({"extended", "quad"}));
  integ->add_option("--quad-tol", ia.quad_tol, "step tolerance for --precision quad")->check(CLI::PositiveNumber);
  integ->add_option("--format", ia.format)->check(CLI::IsMember({"csv", "json"}));
  integ->add_option("--out", ia.out, "output path (default stdout)");

  ClassifyArgs ca;
  auto* cls = app.add_subcommand("classify", "classify steady solutions on a (b, c) grid");
  cls->add_option("--b", ca.b, "b values")->delimiter(',');
  cls->add_option("--c", ca.c, "c values")->delimiter(',');
  cls->add_option("--b-range", ca.b_range, "lo,hi,n")->delimiter(',');
  cls->add_option("--c-range", ca.c_range, "lo,hi,n")->delimiter(',');
  cls->add_option("--tmax", ca.tmax)->check(CLI::PositiveNumber);
  cls->add_option("--format", ca.format)->check(CLI::IsMember({"csv", "json"}));
  cls->add_option("--out", ca.out);

  bool oc_json = false;
  std::string fault;
  auto* orc = app.add_subcommand("oracle-check", "check closed-form solutions, series table and spectra");
  orc->add_flag("--json", oc_json, "structured report");
  orc->add_option("--inject-fault", fault, "test mode: appendix:<component>:<degree>");

  BoundaryArgs ba;
  auto* bnd = app.add_subcommand("boundary", "bisect the completeness boundary");
  bnd->add_option("--b", ba.b)->check(CLI::PositiveNumber);
  bnd->add_option("--c", ba.c);
  bnd->add_option("--blo", ba.blo);
  bnd->add_option("--bhi", ba.bhi);
  bnd->add_option("--clo", ba.clo);
  bnd->add_option("--chi", ba.chi);
  bnd->add_option("--tol", ba.tol)->check(CLI::PositiveNumber);
  bnd->add_flag("--json", ba.as_json);

  SeriesArgs sa;
  auto* ser = app.add_subcommand("series", "dump the power series coefficients as JSON");
  ser->add_option("--lambda", sa.lambda);
  ser->add_option("--b", sa.b)->check(CLI::PositiveNumber);
  ser->add_option("--c", sa.c);
  ser->add_option("--group", sa.group);
  ser->add_option("--order", sa.order)->check(CLI::Range(3, 200));
  ser->add_option("--out", sa.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (integ->parsed()) return cmd_integrate(ia);
    if (cls->parsed()) return cmd_classify(ca);
    if (orc->parsed()) return cmd_oracle_check(oc_json, fault);
    if (bnd->parsed()) return cmd_boundary(ba);
    if (ser->parsed()) return cmd_series(sa);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
