#include "lvx/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "lvx/csv.hpp"
#include "lvx/errors.hpp"

#ifndef LVX_PRESET_DIR
#define LVX_PRESET_DIR "presets"
#endif

namespace lvx::config {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kKeys = {
    // kernel
    "kernel.family", "kernel.damping", "kernel.dimension", "kernel.decay", "kernel.table_path",
    // noise
    "noise.drift_per_unit_volume", "noise.gaussian_variance_per_unit_volume", "noise.jumps", "noise.jump_size",
    "noise.jump_rate_per_unit_volume", "noise.jump_symmetric", "noise.tail_rate", "noise.tail_intensity_per_unit_volume",
    "noise.tail_two_sided", "noise.stable_index", "noise.stable_scale", "noise.stable_skew", "noise.jump_table_path",
    "noise.modulation", "noise.modulation_value", "noise.modulation_radius", "noise.modulation_exponent",
    "noise.small_jump_cutoff", "noise.symmetric", "noise.drift_alpha", "noise.drift_beta", "noise.drift_f0",
    "noise.drift_f1",
    // sigma
    "sigma.form", "sigma.offset", "sigma.slope", "sigma.exponent", "sigma.lipschitz", "sigma.growth_order",
    "sigma.growth_constant",
    // run: model data
    "run.checker", "run.p", "run.q", "run.eta", "run.start", "run.end", "run.initial", "run.initial_value",
    "run.initial_rate",
    // run: deterministic solver
    "run.bound_mode", "run.equation", "run.force", "run.kernel_coefficient", "run.gamma", "run.grid_start",
    "run.grid_end", "run.grid_steps", "run.tolerance", "run.max_iterations",
    // run: simulation
    "run.time", "run.box_lo", "run.box_hi", "run.level", "run.cell_side", "run.picard_tolerance",
    "run.picard_max_iterations", "run.replicates", "run.seed", "run.moment_p", "run.corner", "run.solver",
    "run.reach", "run.history", "run.jackknife_groups", "run.keep_paths", "run.probe", "run.node_t", "run.node_x",
    "run.shifts", "run.offset_dt", "run.offset_dx", "run.offset_count", "run.unchecked",
    // run: examples
    "run.example", "run.lambda", "run.alpha",
    // expect
    "expect.verdict", "expect.first_failure", "expect.exit_code", "expect.note",
};

const std::set<std::string>& key_set() {
  static const std::set<std::string> s(kKeys.begin(), kKeys.end());
  return s;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool known_section(const std::string& s) {
  return s == "kernel" || s == "noise" || s == "sigma" || s == "run" || s == "expect";
}

// nearest known key, for the diagnostic
std::string suggestion(const std::string& key) {
  const auto dot = key.find('.');
  const std::string section = key.substr(0, dot);
  std::string best;
  std::size_t best_score = std::string::npos;
  for (const auto& k : kKeys) {
    if (k.rfind(section + ".", 0) != 0) continue;
    // length of the shared prefix after the section
    std::size_t i = 0;
    while (i < k.size() && i < key.size() && k[i] == key[i]) ++i;
    const std::size_t score = k.size() + key.size() - 2 * i;
    if (score < best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

[[noreturn]] void unknown_key(const std::string& key, const std::string& origin) {
  std::string msg = origin + ": unknown key '" + key + "'";
  const auto s = suggestion(key);
  if (!s.empty()) msg += " (did you mean '" + s + "'?)";
  throw ConfigError(msg);
}

class Reader {
 public:
  Reader(const Table& t, std::string source) : t_(t), source_(std::move(source)) {}

  bool has(const std::string& k) const { return t_.count(k) > 0; }

  std::string str(const std::string& k, const std::string& fallback) const {
    const auto it = t_.find(k);
    return it == t_.end() ? fallback : it->second.value;
  }

  double num(const std::string& k, double fallback) const {
    const auto it = t_.find(k);
    if (it == t_.end()) return fallback;
    return parse_double(it->second, k);
  }

  std::optional<double> opt(const std::string& k) const {
    const auto it = t_.find(k);
    if (it == t_.end()) return std::nullopt;
    return parse_double(it->second, k);
  }

  long long integer(const std::string& k, long long fallback) const {
    const auto it = t_.find(k);
    if (it == t_.end()) return fallback;
    const auto& v = it->second.value;
    long long out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) fail(k, "expected an integer, got '" + v + "'");
    return out;
  }

  std::uint64_t u64(const std::string& k, std::uint64_t fallback) const {
    const auto it = t_.find(k);
    if (it == t_.end()) return fallback;
    const auto& v = it->second.value;
    std::uint64_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
      fail(k, "expected an unsigned 64-bit integer, got '" + v + "'");
    return out;
  }

  bool boolean(const std::string& k, bool fallback) const {
    const auto it = t_.find(k);
    if (it == t_.end()) return fallback;
    const auto& v = it->second.value;
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(k, "expected true or false, got '" + v + "'");
  }

  template <class E>
  E choice(const std::string& k, E fallback, const std::vector<std::pair<std::string, E>>& options) const {
    const auto it = t_.find(k);
    if (it == t_.end()) return fallback;
    std::string list;
    for (const auto& [name, e] : options) {
      if (name == it->second.value) return e;
      list += (list.empty() ? "" : ", ") + name;
    }
    fail(k, "expected one of {" + list + "}, got '" + it->second.value + "'");
  }

  // path relative to the config file
  std::string path(const std::string& k) const {
    const auto it = t_.find(k);
    if (it == t_.end()) fail(k, "missing required key");
    fs::path p(it->second.value);
    if (p.is_relative() && !source_.empty()) p = fs::path(source_).parent_path() / p;
    return p.string();
  }

  [[noreturn]] void fail(const std::string& k, const std::string& what) const {
    const auto it = t_.find(k);
    const std::string where = it == t_.end() ? source_ : it->second.origin;
    throw ConfigError(where + ": " + k + ": " + what);
  }

  // wraps library validation errors with the location of the key
  template <class Fn>
  auto guard(const std::string& k, Fn&& fn) const {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail(k, e.what());
    }
  }

 private:
  double parse_double(const Entry& e, const std::string& k) const {
    const std::string& v = e.value;
    double out = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || std::isnan(out))
      fail(k, "expected a number, got '" + v + "'");
    return out;
  }

  const Table& t_;
  std::string source_;
};

kernels::Kernel build_kernel(const Reader& r) {
  enum class F { heat, exponential, tabulated };
  const F f = r.choice<F>("kernel.family", F::heat,
                          {{"heat", F::heat}, {"exponential", F::exponential}, {"tabulated", F::tabulated}});
  return r.guard("kernel.family", [&] {
    switch (f) {
      case F::heat:
        return kernels::Kernel::heat(r.num("kernel.damping", 1.0), static_cast<int>(r.integer("kernel.dimension", 1)));
      case F::exponential:
        return kernels::Kernel::exponential(r.num("kernel.decay", 1.0));
      case F::tabulated:
        return kernels::Kernel::from_csv(r.path("kernel.table_path"), static_cast<int>(r.integer("kernel.dimension", 1)));
    }
    return kernels::Kernel::heat(1.0, 1);
  });
}

levy::LevyCharacteristics build_noise(const Reader& r) {
  levy::LevyCharacteristics ch;
  ch.drift = r.num("noise.drift_per_unit_volume", 0.0);
  ch.gaussian_variance = r.num("noise.gaussian_variance_per_unit_volume", 0.0);
  ch.small_jump_cutoff = r.num("noise.small_jump_cutoff", ch.small_jump_cutoff);
  ch.declared_symmetric = r.boolean("noise.symmetric", false);
  enum class J { none, point, exponential, stable, tabulated };
  const J j = r.choice<J>("noise.jumps", J::none,
                          {{"none", J::none},
                           {"point", J::point},
                           {"exponential", J::exponential},
                           {"stable", J::stable},
                           {"tabulated", J::tabulated}});
  ch.jumps = r.guard("noise.jumps", [&]() -> levy::JumpMeasure {
    switch (j) {
      case J::none:
        return levy::JumpMeasure();
      case J::point: {
        levy::PointMasses pm;
        const double size = r.num("noise.jump_size", 1.0);
        const double rate = r.num("noise.jump_rate_per_unit_volume", 1.0);
        if (r.boolean("noise.jump_symmetric", false)) {
          pm.atoms.push_back({-size, rate / 2.0});
          pm.atoms.push_back({size, rate / 2.0});
        } else {
          pm.atoms.push_back({size, rate});
        }
        return levy::JumpMeasure(pm);
      }
      case J::exponential:
        return levy::JumpMeasure(levy::ExponentialTails{r.num("noise.tail_rate", 1.0),
                                                        r.num("noise.tail_intensity_per_unit_volume", 1.0),
                                                        r.boolean("noise.tail_two_sided", false)});
      case J::stable:
        return levy::JumpMeasure(levy::AlphaStable{r.num("noise.stable_index", 1.5), r.num("noise.stable_scale", 1.0),
                                                   r.num("noise.stable_skew", 0.0)});
      case J::tabulated: {
        const auto rows = csv::read_numeric(r.path("noise.jump_table_path"));
        levy::TabulatedJumps t;
        for (const auto& row : rows) {
          if (row.size() < 2) throw std::invalid_argument("jump table rows need size, density");
          t.sizes.push_back(row[0]);
          t.density.push_back(row[1]);
        }
        return levy::JumpMeasure(t);
      }
    }
    return levy::JumpMeasure();
  });
  enum class M { none, constant, compact, power };
  ch.modulation.kind = static_cast<levy::ModulationKind>(r.choice<M>(
      "noise.modulation", M::none, {{"none", M::none}, {"constant", M::constant}, {"compact", M::compact}, {"power", M::power}}));
  ch.modulation.value = r.num("noise.modulation_value", 1.0);
  ch.modulation.radius = r.num("noise.modulation_radius", 1.0);
  ch.modulation.exponent = r.num("noise.modulation_exponent", 0.0);
  r.guard("noise", [&] {
    ch.validate();
    return 0;
  });
  return ch;
}

SigmaSpec build_sigma(const Reader& r) {
  SigmaSpec s;
  s.form = r.choice<SigmaForm>("sigma.form", SigmaForm::affine,
                               {{"affine", SigmaForm::affine}, {"sine", SigmaForm::sine}, {"power", SigmaForm::power}});
  s.offset = r.num("sigma.offset", 0.0);
  s.slope = r.num("sigma.slope", 0.0);
  s.exponent = r.num("sigma.exponent", 1.0);
  s.lipschitz = r.opt("sigma.lipschitz");
  s.growth_order = r.opt("sigma.growth_order");
  s.growth_constant = r.opt("sigma.growth_constant");
  return s;
}

std::vector<sim::Shift> parse_shifts(const Reader& r, int dim) {
  // "h:x1,x2;h:x1" ; spatial part repeated over the axes when a single value is given
  std::vector<sim::Shift> out;
  const std::string text = r.str("run.shifts", "");
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    sim::Shift s;
    auto number = [&](const std::string& v) {
      double x = 0.0;
      const std::string t = trim(v);
      const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size()) r.fail("run.shifts", "bad number '" + t + "'");
      return x;
    };
    s.h = number(item.substr(0, colon));
    std::vector<double> xs;
    if (colon != std::string::npos)
      for (const auto& part : csv::split(item.substr(colon + 1), ',')) xs.push_back(number(part));
    if (xs.size() == 1 && dim > 1) xs.assign(static_cast<std::size_t>(dim), xs.front());
    if (xs.empty()) xs.assign(static_cast<std::size_t>(dim), 0.0);
    if (xs.size() != static_cast<std::size_t>(dim)) r.fail("run.shifts", "spatial shift does not match the dimension");
    s.xi = xs;
    out.push_back(s);
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_keys() { return kKeys; }

Table parse(const std::string& text, const std::string& name) {
  Table t;
  std::istringstream in(text);
  std::string line, section;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string origin = name + ":" + std::to_string(n);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) throw ConfigError(origin + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ": expected key = value");
    if (section.empty()) throw ConfigError(origin + ": key outside of a section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key_set().count(key)) unknown_key(key, origin);
    if (t.count(key)) throw ConfigError(origin + ": duplicate key '" + key + "' (first at " + t[key].origin + ")");
    t[key] = {value, origin};
  }
  return t;
}

Table parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void apply_override(Table& table, const std::string& assignment, std::size_t position) {
  const std::string origin = "--set #" + std::to_string(position);
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(origin + ": expected section.key=value, got '" + assignment + "'");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos) throw ConfigError(origin + ": key '" + key + "' needs a section prefix");
  if (!key_set().count(key)) unknown_key(key, origin);
  table[key] = {trim(assignment.substr(eq + 1)), origin};
}

RunConfig build(const Table& table, const std::string& source) {
  const Reader r(table, source);
  RunConfig c;
  c.source = source;
  auto& m = c.model;
  m.kernel = build_kernel(r);
  m.chars = build_noise(r);
  m.sigma = build_sigma(r);
  m.p = r.num("run.p", 2.0);
  m.q = r.num("run.q", m.p);
  m.eta = r.num("run.eta", 0.0);
  m.interval.start = r.num("run.start", 0.0);
  m.interval.end = r.num("run.end", std::numeric_limits<double>::infinity());
  m.drift.alpha = r.opt("noise.drift_alpha");
  m.drift.beta = r.opt("noise.drift_beta");
  m.drift.f0 = r.opt("noise.drift_f0");
  m.drift.f1 = r.opt("noise.drift_f1");
  m.initial.kind = r.choice<InitialKind>(
      "run.initial", InitialKind::constant,
      {{"constant", InitialKind::constant}, {"exponential", InitialKind::exponential}, {"smoothed", InitialKind::smoothed}});
  m.initial.value = r.num("run.initial_value", 0.0);
  m.initial.rate = r.num("run.initial_rate", 0.0);
  r.guard("run", [&] {
    m.validate();
    return 0;
  });

  c.checker = r.choice<wellposedness::Checker>("run.checker", wellposedness::Checker::automatic,
                                               {{"auto", wellposedness::Checker::automatic},
                                                {"finite_horizon", wellposedness::Checker::finite_horizon},
                                                {"heavy_tail", wellposedness::Checker::heavy_tail},
                                                {"infinite_memory", wellposedness::Checker::infinite_memory},
                                                {"asymptotic_stability", wellposedness::Checker::asymptotic_stability}});
  c.bound_mode = r.choice<volterra::BoundMode>("run.bound_mode", volterra::BoundMode::automatic,
                                               {{"auto", volterra::BoundMode::automatic},
                                                {"lipschitz", volterra::BoundMode::lipschitz},
                                                {"growth", volterra::BoundMode::growth}});
  c.equation = r.choice<Equation>("run.equation", Equation::moment_bound,
                                  {{"moment_bound", Equation::moment_bound}, {"renewal", Equation::renewal}});
  c.force = r.num("run.force", 1.0);
  c.kernel_coefficient = r.num("run.kernel_coefficient", 1.0);
  c.gamma = r.num("run.gamma", 1.0);
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) r.fail("run.gamma", "must lie in (0, 1]");
  c.grid_start = r.opt("run.grid_start");
  c.grid_end = r.opt("run.grid_end");
  const auto steps = r.integer("run.grid_steps", 200);
  if (steps < 1) r.fail("run.grid_steps", "must be >= 1");
  c.grid_steps = static_cast<std::size_t>(steps);
  c.tolerance = r.num("run.tolerance", 1e-10);
  if (!(c.tolerance > 0.0)) r.fail("run.tolerance", "must be > 0");
  c.max_iterations = static_cast<int>(r.integer("run.max_iterations", 500));
  if (c.max_iterations < 1) r.fail("run.max_iterations", "must be >= 1");

  auto& s = c.sim;
  c.time = r.num("run.time", std::isfinite(m.interval.end) ? m.interval.end : 1.0);
  c.box_lo = r.num("run.box_lo", -1.0);
  c.box_hi = r.num("run.box_hi", 1.0);
  s.level = static_cast<int>(r.integer("run.level", s.level));
  s.side = r.opt("run.cell_side");
  s.tol = r.num("run.picard_tolerance", s.tol);
  s.max_iter = static_cast<int>(r.integer("run.picard_max_iterations", s.max_iter));
  const auto reps = r.integer("run.replicates", static_cast<long long>(s.replicates));
  if (reps < 1) r.fail("run.replicates", "must be >= 1");
  s.replicates = static_cast<std::size_t>(reps);
  s.seed = r.u64("run.seed", s.seed);
  s.moment_p = r.opt("run.moment_p");
  s.corner = r.choice<sim::Corner>("run.corner", sim::Corner::lower_left,
                                   {{"lower_left", sim::Corner::lower_left}, {"upper_right", sim::Corner::upper_right}});
  s.mode = r.choice<sim::SolveMode>("run.solver", sim::SolveMode::forward,
                                    {{"forward", sim::SolveMode::forward}, {"picard", sim::SolveMode::picard}});
  s.reach = r.num("run.reach", s.reach);
  s.history = r.opt("run.history");
  const auto groups = r.integer("run.jackknife_groups", static_cast<long long>(s.jackknife_groups));
  if (groups < 2) r.fail("run.jackknife_groups", "must be >= 2");
  s.jackknife_groups = static_cast<std::size_t>(groups);
  r.guard("run.level", [&] {
    s.validate();
    return 0;
  });
  const auto keep = r.integer("run.keep_paths", 1);
  if (keep < 0) r.fail("run.keep_paths", "must be >= 0");
  c.keep_paths = static_cast<std::size_t>(keep);
  c.probe = r.choice<Probe>("run.probe", Probe::moments,
                            {{"moments", Probe::moments}, {"stationarity", Probe::stationarity}, {"continuity", Probe::continuity}});
  c.node_t = r.num("run.node_t", c.time);
  c.node_x = r.num("run.node_x", 0.0);
  c.shifts = parse_shifts(r, m.dimension());
  c.offset_dt = r.num("run.offset_dt", 0.0);
  c.offset_dx = r.num("run.offset_dx", 0.5);
  c.offset_count = static_cast<int>(r.integer("run.offset_count", 4));
  if (c.offset_count < 1) r.fail("run.offset_count", "must be >= 1");
  c.unchecked = r.boolean("run.unchecked", false);

  c.example = r.str("run.example", "");
  c.lambda = r.opt("run.lambda");
  c.alpha = r.opt("run.alpha");

  if (r.has("expect.verdict")) {
    const auto v = r.str("expect.verdict", "");
    if (v != "pass" && v != "fail" && v != "undetermined")
      r.fail("expect.verdict", "expected pass, fail or undetermined");
    c.expect.verdict = v;
  }
  if (r.has("expect.first_failure")) c.expect.first_failure = r.str("expect.first_failure", "");
  if (r.has("expect.exit_code")) c.expect.exit_code = static_cast<int>(r.integer("expect.exit_code", 0));
  return c;
}

RunConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  Table t = parse_file(path);
  for (std::size_t i = 0; i < overrides.size(); ++i) apply_override(t, overrides[i], i + 1);
  return build(t, path);
}

std::string preset_dir() {
  if (const char* env = std::getenv("LVX_PRESET_DIR"); env && *env) return env;
  return LVX_PRESET_DIR;
}

std::string resolve_preset(const std::string& name_or_path) {
  if (fs::is_regular_file(name_or_path)) return name_or_path;
  const fs::path p = fs::path(preset_dir()) / (name_or_path + ".ini");
  if (fs::is_regular_file(p)) return p.string();
  throw ConfigError("no config file or preset named '" + name_or_path + "' (preset directory " + preset_dir() + ")");
}

}  // namespace lvx::config
