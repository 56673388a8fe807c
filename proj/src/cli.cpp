#include "lvx/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "lvx/config.hpp"
#include "lvx/csv.hpp"
#include "lvx/errors.hpp"
#include "lvx/simulator.hpp"
#include "lvx/volterra.hpp"
#include "lvx/wellposedness.hpp"

namespace lvx::cli {

namespace {

namespace fs = std::filesystem;
namespace wp = wellposedness;
using config::RunConfig;

constexpr double kInf = std::numeric_limits<double>::infinity();

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir_ / name);
    if (!f) throw ConfigError("cannot write " + (dir_ / name).string());
    f.precision(17);
    return f;
  }

  void report(const wp::ConditionReport& r, const std::string& extra = "") const {
    auto txt = open("report.txt");
    txt << r.text() << extra;
    auto c = open("report.csv");
    r.write_csv(c);
  }

 private:
  fs::path dir_;
};

std::string num(double v) { return csv::format(v); }

wp::ConditionItem item(std::string id, std::string group, std::string description, wp::Verdict v,
                       std::vector<wp::Quantity> qs = {}, std::string note = "") {
  return {std::move(id), std::move(group), std::move(description), std::move(qs), v, std::move(note), true};
}

int verdict_exit(wp::Verdict v) { return v == wp::Verdict::fail ? check_failed : success; }

void write_residual_trace(const Artifacts& a, const NumericalFailure& e) {
  auto f = a.open("trace.csv");
  f << "iteration,sup_difference,bound\n";
  for (std::size_t i = 0; i < e.residuals().size(); ++i) f << i + 1 << ',' << num(e.residuals()[i]) << ",\n";
}

volterra::FieldGrid solver_grid(const RunConfig& c) {
  const auto& I = c.model.interval;
  double end = c.grid_end.value_or(std::isfinite(I.end) ? I.end : (I.whole_line() ? 0.0 : I.start + 20.0));
  if (std::isfinite(I.end)) end = std::min(end, I.end);
  double start = c.grid_start.value_or(I.whole_line() ? end - 20.0 : I.start);
  if (!I.whole_line()) start = std::max(start, I.start);
  if (!(end > start)) throw ConfigError(c.source + ": solver grid is empty (grid_start >= grid_end)");
  return volterra::FieldGrid::uniform_time(start, end, c.grid_steps);
}

volterra::PicardOptions picard_options(const RunConfig& c) {
  volterra::PicardOptions o;
  o.tol = c.tolerance;
  o.max_iter = c.max_iterations;
  return o;
}

// ---------------------------------------------------------------- check

wp::ConditionReport do_check(const RunConfig& c) { return wp::check(c.model, c.checker); }

// ---------------------------------------------------------------- volterra

struct SolveOutcome {
  wp::ConditionReport report;
  volterra::Field field;
  std::vector<volterra::TraceEntry> trace;
  std::string summary;
};

SolveOutcome solve_renewal(const RunConfig& c) {
  const auto& m = c.model;
  const auto grid = solver_grid(c);
  volterra::VolterraProblem pr;
  volterra::VolterraKernel k;
  k.base = m.kernel;
  k.coefficient = c.kernel_coefficient;
  pr.kernels = {k};
  const double F = c.force;
  pr.force = [F](double, std::span<const double>) { return F; };
  pr.p = 1.0;
  pr.gamma = c.gamma;
  pr.start = m.interval.start;
  pr.end = grid.times.back();
  pr.dimension = m.dimension();
  const double mass = k.mass(kInf);

  SolveOutcome o;
  o.report.checker = "renewal";
  auto res = volterra::picard_solve(pr, grid, picard_options(c));
  o.field = res.solution;
  o.trace = res.trace;
  const double sup = o.field.sup();
  const std::vector<wp::Quantity> base{{"kernel_mass", mass}, {"force", F}, {"gamma", c.gamma}};
  if (c.gamma < 1.0) {
    const bool finite = std::isfinite(mass);
    o.report.items.push_back(item("kernel_mass", "kernel", "kernel has finite total mass", finite ? wp::Verdict::pass : wp::Verdict::fail,
                                  base));
    if (finite) {
      const double a = volterra::stability_fixed_point(std::abs(F), mass, c.gamma);
      o.report.items.push_back(item("global_bound", "solution", "solution stays below the fixed point of a = F + |g| a^gamma",
                                    sup <= a * (1.0 + 1e-9) ? wp::Verdict::pass : wp::Verdict::fail,
                                    {{"sup_v", sup}, {"fixed_point", a}}));
    }
  } else {
    const bool small = mass < 1.0;
    o.report.items.push_back(item("kernel_mass", "kernel", "kernel mass below 1 (bounded renewal solutions)",
                                  small ? wp::Verdict::pass : wp::Verdict::fail, base,
                                  small ? "" : "mass >= 1: solutions are not bounded uniformly in time"));
    if (small) {
      const double b = std::abs(F) / (1.0 - mass);
      o.report.items.push_back(item("global_bound", "solution", "solution stays below F / (1 - mass)",
                                    sup <= b * (1.0 + 1e-9) ? wp::Verdict::pass : wp::Verdict::fail,
                                    {{"sup_v", sup}, {"bound", b}}));
    }
  }
  std::ostringstream s;
  s << "iterations: " << res.iterations << "\nconverged: " << (res.converged ? "true" : "false")
    << "\nsup of solution: " << num(sup) << "\nsolution at " << num(grid.times.back()) << ": " << num(o.field.values.back())
    << "\n";
  o.summary = s.str();
  return o;
}

SolveOutcome solve_moment_bound(const RunConfig& c, volterra::BoundMode mode) {
  const auto grid = solver_grid(c);
  volterra::MomentBoundOptions opts;
  opts.mode = mode;
  opts.picard = picard_options(c);
  SolveOutcome o;
  o.report.checker = "moment_bound";
  o.field = volterra::moment_bound(c.model, grid, opts, &o.trace);
  const double sup = o.field.sup();
  const bool finite = !o.field.divergent && std::isfinite(sup);
  o.report.items.push_back(item("finite_bound", "solution", "moment bound is finite on the grid",
                                finite ? wp::Verdict::pass : wp::Verdict::fail, {{"sup_bound", sup}, {"eta", c.model.eta}},
                                finite ? "" : "the force of the bounding equation is unbounded in the weighted norm"));
  std::ostringstream s;
  s << "sup of the bound on ||Y||_p / w^(1/(p v 1)): " << num(sup) << "\n";
  o.summary = s.str();
  return o;
}

void write_solve(const Artifacts& a, const SolveOutcome& o) {
  a.report(o.report, o.summary);
  auto f = a.open("field.csv");
  o.field.write_csv(f);
  auto t = a.open("trace.csv");
  volterra::write_trace_csv(t, o.trace);
}

int cmd_volterra(const RunConfig& c, const Artifacts& a, std::ostream& out) {
  const auto o = c.equation == config::Equation::renewal ? solve_renewal(c) : solve_moment_bound(c, c.bound_mode);
  write_solve(a, o);
  out << o.report.text() << o.summary;
  return verdict_exit(o.report.overall());
}

// ---------------------------------------------------------------- stability

int cmd_stability(const RunConfig& c, const Artifacts& a, std::ostream& out) {
  auto report = wp::check_asymptotic_stability(c.model);
  std::string extra;
  volterra::Field field;
  std::vector<volterra::TraceEntry> trace;
  bool have_field = false;
  if (report.overall() != wp::Verdict::fail) {
    // bounded weighted moments on the solver grid
    try {
      auto o = solve_moment_bound(c, volterra::BoundMode::growth);
      field = o.field;
      trace = o.trace;
      have_field = true;
      extra = o.summary;
    } catch (const NumericalFailure& e) {
      extra = std::string("moment bound: ") + e.what() + "\n";
    }
  }
  a.report(report, extra);
  if (have_field) {
    auto f = a.open("field.csv");
    field.write_csv(f);
    auto t = a.open("trace.csv");
    volterra::write_trace_csv(t, trace);
  }
  out << report.text() << extra;
  return verdict_exit(report.overall());
}

// ---------------------------------------------------------------- simulate

void write_paths(const Artifacts& a, const sim::PathEnsemble& ens) {
  auto f = a.open("field.csv");
  const std::size_t d = ens.paths.empty() ? 0 : static_cast<std::size_t>(ens.paths.front().grid.dimension());
  f << "replicate,t";
  for (std::size_t k = 0; k < d; ++k) f << ",x" << k + 1;
  f << ",value\n";
  for (std::size_t r = 0; r < ens.paths.size(); ++r) {
    const auto& p = ens.paths[r];
    const std::size_t M = p.grid.space_count();
    for (std::size_t i = 0; i <= p.grid.steps; ++i)
      for (std::size_t j = 0; j < M; ++j) {
        f << r << ',' << num(p.grid.time(i));
        for (double x : p.grid.corner(j)) f << ',' << num(x);
        f << ',' << num(p.at(i, j)) << '\n';
      }
  }
}

int cmd_simulate(const RunConfig& c, const Artifacts& a, std::ostream& out, std::ostream& err) {
  const auto& m = c.model;
  auto report = wp::check(m, c.checker);
  if (report.overall() == wp::Verdict::fail) {
    if (!c.unchecked) {
      a.report(report, "simulation skipped: the model fails its well-posedness check (set run.unchecked = true to force)\n");
      out << report.text();
      err << "simulation skipped: the model fails its well-posedness check\n";
      return check_failed;
    }
    err << "warning: simulating a model that fails its well-posedness check\n";
  }
  const int d = m.dimension();
  std::ostringstream summary;
  summary << "seed: " << c.sim.seed << "\nreplicates: " << c.sim.replicates << "\nlevel: " << c.sim.level << "\n";

  if (c.probe == config::Probe::moments) {
    const std::vector<double> lo(static_cast<std::size_t>(d), c.box_lo), hi(static_cast<std::size_t>(d), c.box_hi);
    const auto grid = sim::build_grid(c.time, lo, hi, c.sim.level, m.interval.start, c.sim.side);
    const auto ens = sim::estimate_moments(m, grid, c.sim, {}, c.keep_paths);
    std::vector<double> bound;
    std::string bound_note;
    if (ens.p == m.p) {
      try {
        bound = sim::moment_bound_at(m, ens.nodes);
      } catch (const std::exception& e) {
        bound_note = e.what();
      }
    } else {
      bound_note = "moment exponent differs from the model's p";
    }
    auto f = a.open("moments.csv");
    ens.write_csv(f, bound.empty() ? nullptr : &bound);
    write_paths(a, ens);
    summary << "moment exponent: " << num(ens.p) << "\n";
    if (!ens.estimable) summary << ens.note << "\n";
    summary << "weighted sup statistic: " << num(ens.sup_statistic) << " (jackknife se " << num(ens.sup_se) << ")\n";
    if (!bound.empty() && ens.estimable) {
      double worst = -kInf;
      for (std::size_t n = 0; n < bound.size(); ++n) worst = std::max(worst, ens.moment[n] - bound[n] - 3.0 * ens.se[n]);
      const bool ok = worst <= 0.0;
      report.items.push_back(item("moment_domination", "simulation", "MC moments stay below the moment bound + 3 SE",
                                  ok ? wp::Verdict::pass : wp::Verdict::fail, {{"max_excess", worst}}));
      report.items.back().counted = false;
    } else if (!bound_note.empty()) {
      summary << "moment bound unavailable: " << bound_note << "\n";
    }
  } else if (c.probe == config::Probe::stationarity) {
    if (c.shifts.empty()) throw ConfigError(c.source + ": run.shifts: stationarity probe needs at least one shift");
    const sim::Node node{c.node_t, std::vector<double>(static_cast<std::size_t>(d), c.node_x)};
    const auto rep = sim::stationarity_probe(m, node, c.shifts, c.sim);
    auto f = a.open("moments.csv");
    rep.write_csv(f);
    summary << "max |z|: " << num(rep.max_abs_z) << "\nflagged: " << (rep.flagged ? "true" : "false") << "\n";
    report.items.push_back(item("stationarity", "simulation", "standardized discrepancies below 3",
                                rep.flagged ? wp::Verdict::fail : wp::Verdict::pass, {{"max_abs_z", rep.max_abs_z}}));
    report.items.back().counted = false;
  } else {
    const sim::Node node{c.node_t, std::vector<double>(static_cast<std::size_t>(d), c.node_x)};
    std::vector<std::pair<double, std::vector<double>>> offsets;
    for (int k = 0; k < c.offset_count; ++k) {
      const double s = std::ldexp(1.0, -k);
      std::vector<double> dx(static_cast<std::size_t>(d), 0.0);
      if (d > 0) dx[0] = c.offset_dx * s;
      offsets.push_back({c.offset_dt * s, dx});
    }
    const auto rep = sim::continuity_probe(m, node, offsets, c.sim);
    auto f = a.open("moments.csv");
    rep.write_csv(f);
    summary << "decreasing: " << (rep.decreasing ? "true" : "false") << "\n";
    report.items.push_back(item("continuity", "simulation", "increment moments decrease along the shrinking offsets",
                                rep.decreasing ? wp::Verdict::pass : wp::Verdict::fail));
    report.items.back().counted = false;
  }
  a.report(report, summary.str());
  out << report.text() << summary.str();
  return success;
}

// ---------------------------------------------------------------- reproduce-example

struct Outcome {
  wp::ConditionReport report;
  std::string summary;
};

Outcome example_exp_family(const RunConfig& c, const Artifacts& a) {
  const double lambda = c.lambda.value_or(2.0);
  const auto fam = volterra::exp_kernel_family(lambda, c.alpha);
  Outcome o;
  o.report.checker = "exponential_family";
  o.report.items.push_back(item("solution_family", "family", "equation has solutions",
                                fam.kind == volterra::ExpKernelFamily::Kind::none ? wp::Verdict::fail : wp::Verdict::pass,
                                {{"lambda", lambda}}, fam.describe()));
  o.report.items.push_back(item("bounded_unique", "family", "exactly one bounded solution",
                                fam.bounded_unique ? wp::Verdict::pass : wp::Verdict::fail, {{"lambda", lambda}}));
  std::ostringstream s;
  s << "lambda: " << num(lambda) << "\n";
  if (c.alpha) s << "alpha: " << num(*c.alpha) << "\n";
  s << "family: " << (fam.kind == volterra::ExpKernelFamily::Kind::none ? "no solution" : "v(t) = " + fam.describe())
    << "\nbounded unique: " << (fam.bounded_unique ? "true" : "false") << "\n";
  if (fam.bounded_unique && !c.alpha) {
    // the bounded member is the constant; Picard on the whole line must find it
    volterra::VolterraProblem pr;
    volterra::VolterraKernel k;
    k.base = kernels::Kernel::exponential(lambda);
    pr.kernels = {k};
    pr.force = [](double, std::span<const double>) { return 1.0; };
    pr.start = -kInf;
    pr.end = 0.0;
    const auto grid = volterra::FieldGrid::uniform_time(-5.0, 0.0, 100);
    auto res = volterra::picard_solve(pr, grid, picard_options(c));
    double err = 0.0;
    for (double v : res.solution.values) err = std::max(err, std::abs(v - fam.constant));
    s << "picard iterations: " << res.iterations << "\nsup |v - " << num(fam.constant) << "|: " << num(err) << "\n";
    auto f = a.open("field.csv");
    res.solution.write_csv(f);
    auto t = a.open("trace.csv");
    volterra::write_trace_csv(t, res.trace);
  }
  o.summary = s.str();
  return o;
}

int cmd_reproduce(const RunConfig& c, const Artifacts& a, std::ostream& out, bool expectation_applies) {
  Outcome o;
  if (c.example == "ex4.1") {
    o = example_exp_family(c, a);
  } else if (c.equation == config::Equation::renewal) {
    const auto s = solve_renewal(c);
    write_solve(a, s);
    o = {s.report, s.summary};
  } else {
    o.report = wp::check(c.model, c.checker);
  }
  const auto verdict = o.report.overall();
  std::ostringstream s;
  s << o.summary;
  s << "example: " << (c.example.empty() ? c.source : c.example) << "\n";
  bool reproduced = true;
  if (expectation_applies && c.expect.verdict) {
    const auto* first = o.report.first_failure();
    reproduced = wp::to_string(verdict) == *c.expect.verdict;
    if (c.expect.first_failure) reproduced = reproduced && first && first->id == *c.expect.first_failure;
    s << "expected verdict: " << *c.expect.verdict;
    if (c.expect.first_failure) s << " at " << *c.expect.first_failure;
    s << "\nreproduced: " << (reproduced ? "yes" : "no") << "\n";
  }
  a.report(o.report, s.str());
  out << o.report.text() << s.str();
  if (expectation_applies && c.expect.verdict) return reproduced ? success : check_failed;
  return verdict_exit(verdict);
}

}  // namespace

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> commands{"check", "volterra", "simulate", "stability", "reproduce-example"};
  if (std::find(commands.begin(), commands.end(), inv.command) == commands.end()) {
    err << "error: unknown command '" << inv.command << "' (expected check, volterra, simulate, stability or reproduce-example)\n";
    return usage_error;
  }
  try {
    std::vector<std::string> overrides = inv.overrides;
    if (inv.seed) overrides.push_back("run.seed=" + std::to_string(*inv.seed));
    if (inv.lambda) overrides.push_back("run.lambda=" + num(*inv.lambda));
    if (inv.alpha) overrides.push_back("run.alpha=" + num(*inv.alpha));
    const bool reproduce = inv.command == "reproduce-example";
    const std::string path = reproduce ? config::resolve_preset(inv.config) : inv.config;
    const RunConfig c = config::load(path, overrides);
    const Artifacts a(inv.out_dir.value_or("."));
    try {
      if (inv.command == "check") {
        const auto r = do_check(c);
        a.report(r);
        out << r.text();
        return verdict_exit(r.overall());
      }
      if (inv.command == "volterra") return cmd_volterra(c, a, out);
      if (inv.command == "stability") return cmd_stability(c, a, out);
      if (inv.command == "simulate") return cmd_simulate(c, a, out, err);
      const bool pristine = inv.overrides.empty() && !inv.lambda && !inv.alpha;
      return cmd_reproduce(c, a, out, pristine);
    } catch (const NumericalFailure& e) {
      write_residual_trace(a, e);
      err << "numerical failure: " << e.what() << "\n";
      if (!e.residuals().empty()) {
        err << "residual trace:";
        for (double r : e.residuals()) err << ' ' << num(r);
        err << "\n";
      }
      return numerical_failure;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return usage_error;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return usage_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return usage_error;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"lvx: well-posedness checks, Volterra bounds and Monte Carlo for Levy-driven Volterra equations"};
  Invocation inv;
  app.add_option("command", inv.command, "check | volterra | simulate | stability | reproduce-example")->required();
  app.add_option("config", inv.config, "config file (or preset name for reproduce-example)")->required();
  app.add_option("--set", inv.overrides, "override a config scalar: section.key=value")->allow_extra_args(false);
  std::string out_dir;
  auto* out_opt = app.add_option("--out", out_dir, "output directory (default: current directory)");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "base seed for the simulator");
  double lambda = 0.0, alpha = 0.0;
  auto* lambda_opt = app.add_option("--lambda", lambda, "kernel rate for the exponential-kernel example");
  auto* alpha_opt = app.add_option("--alpha", alpha, "weight exponent for the exponential-kernel example");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? success : usage_error;
  }
  if (*out_opt) inv.out_dir = out_dir;
  if (*seed_opt) inv.seed = seed;
  if (*lambda_opt) inv.lambda = lambda;
  if (*alpha_opt) inv.alpha = alpha;
  return run(inv, std::cout, std::cerr);
}

}  // namespace lvx::cli
