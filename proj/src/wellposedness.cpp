#include "lvx/wellposedness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lvx/errors.hpp"
#include "lvx/volterra.hpp"

namespace lvx::wellposedness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLocalHorizon = 1.0;  // local integrability is checked on [0, 1]

Verdict from(bool ok) { return ok ? Verdict::pass : Verdict::fail; }

struct Builder {
  ConditionReport report;
  ConditionItem& add(std::string id, std::string group, std::string description, Verdict v,
                     std::vector<Quantity> qs = {}, std::string note = "") {
    report.items.push_back({std::move(id), std::move(group), std::move(description), std::move(qs), v,
                            std::move(note), true});
    return report.items.back();
  }
};

// kernel integral verdict; tabulated kernels cannot be classified
Verdict integral_verdict(const ModelSpec& m, double value) {
  if (m.kernel.is_tabulated()) return Verdict::undetermined;
  return from(std::isfinite(value));
}

const char* kTabulatedNote = "tabulated kernel: divergence cannot be classified from samples";

std::string integral_note(const ModelSpec& m) { return m.kernel.is_tabulated() ? kTabulatedNote : ""; }

double safe_truncated(const kernels::Kernel& k, double p, double q, double horizon, double eta) {
  if (!(p > 0.0) || !(q > 0.0)) return kInf;
  return kernels::truncated_lp_norm(k, p, q, horizon, eta).value;
}

// int_0^inf g^p e^{-eta t}
double weighted_norm(const kernels::Kernel& k, double p, double eta) {
  if (k.is_heat()) return kernels::weighted_lp_norm(k, p, eta).value;
  return kernels::truncated_lp_norm(k, p, p, kInf, eta).value;
}

void add_lipschitz(Builder& b, const ModelSpec& m) {
  const auto lip = m.sigma.lipschitz_constant();
  if (lip)
    b.add("sigma_lipschitz", "setup", "sigma is globally Lipschitz", Verdict::pass, {{"C_sigma1", *lip}});
  else
    b.add("sigma_lipschitz", "setup", "sigma is globally Lipschitz", Verdict::fail, {},
          "power nonlinearity with exponent < 1 has no global Lipschitz constant");
}

void add_finite_start(Builder& b, const ModelSpec& m) {
  const bool ok = std::isfinite(m.interval.start);
  b.add("finite_start", "setup", "equation posed from a finite initial time", from(ok), {{"start", m.interval.start}},
        ok ? "" : "whole-line problems need the infinite-memory checker");
}

void add_exclusions(Builder& b, const ModelSpec& m, double p, const std::string& group) {
  const auto& ch = m.chars;
  if (p < 1.0) {
    const bool ok = b0_vanishes(ch);
    b.add("drift_exclusion", group, "no drift b0 after removing the small-jump compensator (exponent < 1)", from(ok),
          {{"exponent", p}}, ok ? "" : "b0 must vanish identically when the exponent is below 1");
  } else {
    b.add("drift_exclusion", group, "no drift b0 after removing the small-jump compensator (exponent < 1)",
          Verdict::pass, {{"exponent", p}}, "not required for exponent >= 1");
  }
  const double c = ch.gaussian_variance;
  const bool ok = p >= 2.0 || c == 0.0;
  b.add("gaussian_exclusion", group, "no Gaussian part unless the exponent is 2", from(ok),
        {{"exponent", p}, {"c", c}}, ok ? "" : "a Gaussian part needs exponent 2");
}

}  // namespace

double bdg_constant(double p) {
  if (!(p > 0.0 && p <= 2.0)) throw std::invalid_argument("bdg_constant needs p in (0, 2]");
  if (p < 1.0) return 1.0;
  if (p == 1.0) return 2.0;
  if (p == 2.0) return 1.0;
  return std::sqrt(8.0 * p);
}

ConditionReport check_finite_horizon(const ModelSpec& m) {
  m.validate();
  Builder b;
  b.report.checker = "finite_horizon";
  const double p = m.p;
  add_finite_start(b, m);
  add_lipschitz(b, m);
  b.add("initial_data", "setup", "initial term has locally bounded p-th moments", Verdict::pass, {},
        "deterministic initial data is locally bounded");
  add_exclusions(b, m, p, "noise");
  const double zeta = jump_moment_sup(m.chars, p, p);
  b.add("jump_moment", "noise", "p-th absolute jump moment is finite", from(std::isfinite(zeta)),
        {{"zeta_p", zeta}});

  const double lp = kernels::lp_norm(m.kernel, p, kLocalHorizon).value;
  b.add("local_integrability", "kernel", "kernel is locally p-integrable", integral_verdict(m, lp),
        {{"int_0^1 g^p", lp}}, integral_note(m));

  const auto b1 = b1_sup(m.chars);
  if (p >= 1.0 && b1 && *b1 != 0.0) {
    const double l1 = kernels::lp_norm(m.kernel, 1.0, kLocalHorizon).value;
    b.add("mean_integrability", "kernel", "kernel is locally integrable (non-martingale noise)",
          integral_verdict(m, l1), {{"int_0^1 g", l1}, {"b1", *b1}}, integral_note(m));
  } else {
    b.add("mean_integrability", "kernel", "kernel is locally integrable (non-martingale noise)", Verdict::pass,
          {{"b1", b1.value_or(kInf)}}, p < 1.0 ? "not required for p < 1" : "martingale noise");
  }
  return b.report;
}

ConditionReport check_heavy_tail(const ModelSpec& m) {
  m.validate();
  Builder b;
  b.report.checker = "heavy_tail";
  const double p = m.p, q = m.q;
  const auto& ch = m.chars;

  add_finite_start(b, m);
  b.report.items.back().group = "part1";
  add_lipschitz(b, m);
  b.report.items.back().group = "part1";
  b.add("initial_data", "part1", "initial term has locally bounded q-th moments", Verdict::pass, {},
        "deterministic initial data is locally bounded");
  add_exclusions(b, m, q, "part1");
  const double small = ch.jumps.empty() ? 0.0 : ch.modulation.sup() * ch.jumps.abs_moment(q, 0.0, 1.0);
  b.add("small_jump_moment", "part1", "q-th moment of the jumps of size at most 1 is finite",
        from(std::isfinite(small)), {{"q", q}, {"small_moment_q", small}});
  const double lq = kernels::lp_norm(m.kernel, q, kLocalHorizon).value;
  b.add("local_integrability", "part1", "kernel is locally q-integrable", integral_verdict(m, lq),
        {{"int_0^1 g^q", lq}}, integral_note(m));
  if (q >= 1.0) {
    const double l1 = kernels::lp_norm(m.kernel, 1.0, kLocalHorizon).value;
    const bool sym = ch.symmetric();
    Verdict v = sym ? Verdict::pass : integral_verdict(m, l1);
    b.add("mean_integrability", "part1", "kernel is locally integrable or the noise is symmetric", v,
          {{"int_0^1 g", l1}, {"symmetric", sym ? 1.0 : 0.0}}, sym ? "" : integral_note(m));
  } else {
    b.add("mean_integrability", "part1", "kernel is locally integrable or the noise is symmetric", Verdict::pass,
          {{"q", q}}, "not required for q < 1");
  }
  {
    const bool none = ch.jumps.empty() || ch.modulation.sup() == 0.0;
    const bool ok = none || (std::isfinite(ch.modulation.sup()) && ch.modulation.integrable(m.dimension()));
    b.add("space_decay", "part1", "jump intensity modulation is bounded and integrable in space", from(ok),
          {{"sup_pi1", ch.modulation.sup()}},
          ok ? "" : "the large-jump intensity must decay in space; a homogeneous jump part is not allowed");
  }

  // part 2: moments of order p < q under a growth condition
  const double gamma = m.sigma.growth_gamma();
  b.add("growth_order", "part2", "sigma has growth order gamma < 1", from(gamma > 0.0 && gamma < 1.0),
        {{"gamma", gamma}, {"C_sigma2", m.sigma.growth_coefficient()}});
  {
    const bool ok = p < q && q * gamma <= p && p > 0.0 && p < 2.0;
    b.add("moment_order", "part2", "p < q and q gamma <= p", from(ok), {{"p", p}, {"q", q}, {"q*gamma", q * gamma}});
  }
  const double zpq = jump_moment_sup(ch, p, q);
  b.add("jump_moment", "part2", "jump moment with exponent p above 1 and q below 1 is finite",
        from(std::isfinite(zpq)), {{"int |z|^p_q pi0", zpq}});
  const double tg = safe_truncated(m.kernel, q, p, kLocalHorizon, 0.0);
  b.add("truncated_integrability", "part2", "kernel with exponent q above 1 and p below 1 is locally integrable",
        integral_verdict(m, tg), {{"int_0^1 |g|^q_p", tg}}, integral_note(m));
  return b.report;
}

ConditionReport check_infinite_memory(const ModelSpec& m) {
  m.validate();
  Builder b;
  b.report.checker = "infinite_memory";
  const double p = m.p, eta = m.eta;
  const auto& ch = m.chars;

  b.add("whole_line", "setup", "equation posed on the whole time line", from(m.interval.whole_line()),
        {{"start", m.interval.start}});
  add_lipschitz(b, m);
  {
    // |Y0(t)|^p / w(t) must stay bounded as t -> -inf
    const double r = m.initial.kind == InitialKind::exponential ? m.initial.rate : 0.0;
    const double expo = p * r - eta;
    const bool ok = m.initial.value == 0.0 || expo >= 0.0;
    b.add("initial_data", "setup", "initial term lies in the weighted space", from(ok),
          {{"growth_exponent", expo}, {"eta", eta}},
          ok ? "" : "|Y0|^p / w grows without bound as t -> -inf");
  }
  const bool noise = ch.gaussian_variance > 0.0 || ch.drift != 0.0 || !ch.jumps.empty();
  {
    const double s0 = m.sigma.at_zero();
    const bool ok = eta == 0.0 || s0 == 0.0 || !noise;
    b.add("weight_sigma_zero", "setup", "sigma(0) = 0 whenever the weight is not constant", from(ok),
          {{"sigma(0)", s0}, {"eta", eta}},
          ok ? "" : "with eta != 0 the terms involving sigma(0) are not bounded relative to the weight");
  }
  add_exclusions(b, m, p, "noise");
  const double zeta = jump_moment_sup(ch, p, p);
  b.add("jump_moment", "noise", "p-th absolute jump moment is finite", from(std::isfinite(zeta)), {{"zeta_p", zeta}});

  const double gp = weighted_norm(m.kernel, p, eta);
  b.add("kernel_integrability", "kernel", "int_0^inf int g^p e^{-eta t} is finite", integral_verdict(m, gp),
        {{"weighted_int_g^p", gp}}, integral_note(m));
  const auto b1 = b1_sup(ch);
  double g1w = 0.0, g1 = 0.0;
  if (p >= 1.0 && b1 && *b1 != 0.0) {
    g1w = weighted_norm(m.kernel, 1.0, eta);
    g1 = weighted_norm(m.kernel, 1.0, 0.0);
    const Verdict v = m.kernel.is_tabulated() ? Verdict::undetermined
                                              : from(std::isfinite(g1w) && std::isfinite(g1));
    b.add("mean_integrability", "kernel", "kernel is integrable with and without the weight (non-martingale noise)", v,
          {{"weighted_int_g", g1w}, {"int_g", g1}, {"b1", *b1}}, integral_note(m));
  } else if (p >= 1.0 && !b1) {
    b.add("mean_integrability", "kernel", "kernel is integrable with and without the weight (non-martingale noise)",
          Verdict::fail, {}, "large-jump mean is not defined");
  }

  const auto lip = m.sigma.lipschitz_constant();
  const double C = lip.value_or(kInf);
  double lhs;
  std::vector<Quantity> qs{{"C_sigma1", C}, {"zeta_p", zeta}, {"weighted_int_g^p", gp}};
  if (p < 1.0) {
    lhs = std::pow(C, p) * zeta * gp;
    if (zeta == 0.0 || C == 0.0) lhs = 0.0;
  } else {
    const double cb = bdg_constant(p);
    const double c = ch.gaussian_variance;
    const double b1v = b1.value_or(kInf);
    double mean_term = 0.0;
    if (b1v != 0.0) {
      const double g1u = g1 > 0.0 ? g1 : weighted_norm(m.kernel, 1.0, 0.0);
      const double g1e = g1w > 0.0 ? g1w : weighted_norm(m.kernel, 1.0, eta);
      mean_term = b1v * std::pow(g1u, (p - 1.0) / p) * std::pow(g1e, 1.0 / p);
    }
    const double mart = (zeta + c) == 0.0 ? 0.0 : cb * std::pow((zeta + c) * gp, 1.0 / p);
    lhs = C == 0.0 ? 0.0 : C * (mart + mean_term);
    qs.push_back({"C_BDG", cb});
    qs.push_back({"c", c});
    qs.push_back({"b1", b1v});
    qs.push_back({"mean_term", mean_term});
  }
  b.report.size_lhs = lhs;
  qs.push_back({"lhs", lhs});
  Verdict sv = from(lhs < 1.0);
  if (m.kernel.is_tabulated() && sv == Verdict::fail && !std::isfinite(lhs)) sv = Verdict::undetermined;
  b.add("size_condition", "size", "size condition left-hand side < 1", sv, qs);
  return b.report;
}

ConditionReport check_asymptotic_stability(const ModelSpec& m) {
  m.validate();
  Builder b;
  b.report.checker = "asymptotic_stability";
  const double p = m.p, eta = m.eta;
  const auto& ch = m.chars;
  const auto& I = m.interval;
  const double len = I.length();
  const double gamma = m.sigma.growth_gamma();
  const double c2 = m.sigma.growth_coefficient();
  // without jumps the exponent q only has to exist; q = p is admissible
  const bool no_jumps = ch.jumps.empty() || ch.modulation.sup() == 0.0;
  const double q = no_jumps ? p : m.q;

  {
    const bool ok = (!I.whole_line() || eta <= 0.0) && (!I.unbounded_above() || eta >= 0.0);
    b.add("weight_bounded_below", "setup", "1 / w is bounded on the interval", from(ok), {{"eta", eta}});
  }
  {
    // |Y0|^p / w ~ e^{expo t}
    double expo = 0.0;
    bool ok = true;
    if (m.initial.value != 0.0) {
      if (m.initial.kind == InitialKind::smoothed) {
        double decay = 0.0;
        if (const auto* h = std::get_if<kernels::Heat>(&m.kernel.family())) decay = h->damping;
        if (const auto* e = std::get_if<kernels::Exponential>(&m.kernel.family())) decay = e->decay;
        expo = -decay * p - eta;
      } else {
        const double r = m.initial.kind == InitialKind::exponential ? m.initial.rate : 0.0;
        expo = p * r - eta;
      }
      if (I.whole_line() && expo < 0.0) ok = false;
      if (I.unbounded_above() && expo > 0.0 && !m.kernel.is_tabulated()) ok = false;
    }
    b.add("initial_data", "setup", "initial term is bounded in the weighted space", from(ok),
          {{"growth_exponent", expo}});
  }
  b.add("growth_condition", "setup", "|sigma(x)| <= |sigma(0)| + C_sigma2 |x|^gamma", from(gamma > 0.0 && gamma <= 1.0),
        {{"gamma", gamma}, {"C_sigma2", c2}, {"sigma(0)", m.sigma.at_zero()}});

  // Gaussian part
  {
    const double c = ch.gaussian_variance;
    if (c == 0.0) {
      b.add("gaussian_growth", "noise", "no Gaussian part, or 2 gamma <= p with a finite weighted square integral",
            Verdict::pass, {{"c", 0.0}});
    } else {
      const double g2 = safe_truncated(m.kernel, 2.0, 2.0, len, eta);
      Verdict v = integral_verdict(m, g2);
      if (2.0 * gamma > p) v = Verdict::fail;
      b.add("gaussian_growth", "noise", "no Gaussian part, or 2 gamma <= p with a finite weighted square integral", v,
            {{"c", c}, {"2*gamma", 2.0 * gamma}, {"int g^2 e^{-eta t}", c * g2}}, integral_note(m));
    }
  }
  // jumps, bounded through |gz|^p_q <= |g|^p_q |z|^q_p or <= |g|^q_p |z|^p_q
  {
    std::vector<Quantity> qs{{"q", q}, {"q*gamma", q * gamma}};
    bool ok = q >= p && q <= 2.0 && q * gamma <= p;
    Verdict v = from(ok);
    std::string note;
    if (!no_jumps) {
      const double ga = safe_truncated(m.kernel, p, q, len, eta);
      const double za = jump_moment_sup(ch, q, p);
      const double gb = safe_truncated(m.kernel, q, p, len, eta);
      const double zb = jump_moment_sup(ch, p, q);
      const double bound = std::min(ga * za, gb * zb);
      qs.insert(qs.end(), {{"int |g|^p_q", ga}, {"int |z|^q_p", za}, {"int |g|^q_p", gb}, {"int |z|^p_q", zb},
                           {"bound", bound}});
      if (ok) {
        v = integral_verdict(m, bound);
        if (v == Verdict::fail) note = "no product bound on the truncated jump integral is finite";
        if (v == Verdict::undetermined) note = kTabulatedNote;
      } else {
        note = "needs p <= q <= 2 and q gamma <= p";
      }
    } else {
      note = "no jumps; q = p";
    }
    b.add("jump_growth", "noise", "truncated jump integral finite for some p <= q <= 2 with q gamma <= p", v, qs, note);
  }
  // drift
  double ab = 0.0;
  if (p >= 1.0) {
    const auto b1 = b1_sup(ch);
    if (!b1) {
      b.add("drift_growth", "noise", "large-jump mean integrable against the kernel", Verdict::fail, {},
            "large-jump mean is not defined");
    } else if (*b1 == 0.0) {
      b.add("drift_growth", "noise", "large-jump mean integrable against the kernel", Verdict::pass, {{"b1", 0.0}});
    } else {
      const double gw = safe_truncated(m.kernel, 1.0, 1.0, len, eta);
      const double g0 = safe_truncated(m.kernel, 1.0, 1.0, len, 0.0);
      b.add("drift_growth", "noise", "large-jump mean integrable against the kernel",
            m.kernel.is_tabulated() ? Verdict::undetermined : from(std::isfinite(gw) && std::isfinite(g0)),
            {{"b1", *b1}, {"weighted_int_g", gw}, {"int_g", g0}}, integral_note(m));
    }
  } else {
    const auto env = resolve_drift_envelope(ch, m.drift, p);
    ab = std::max(*env.alpha, *env.beta);
    const double F = std::max(*env.f0, *env.f1);
    const double gi = F == 0.0 ? 0.0 : F * safe_truncated(m.kernel, *env.alpha, *env.beta, len, 0.0);
    Verdict v = from(std::isfinite(F) && ab * gamma <= p);
    if (v == Verdict::pass && F != 0.0) v = integral_verdict(m, gi);
    b.add("drift_growth", "noise", "drift envelopes finite, (alpha v beta) gamma <= p and kernel integral finite", v,
          {{"alpha", *env.alpha}, {"beta", *env.beta}, {"F0", *env.f0}, {"F1", *env.f1}, {"integral", gi}},
          integral_note(m));
  }

  // alternative branches
  const bool gauss = ch.gaussian_variance != 0.0;
  bool frac = gamma < 1.0 && q * gamma < p && (!gauss || 2.0 * gamma < p) && (p >= 1.0 || ab * gamma < p);
  b.add("fractional_branch", "stability", "gamma < 1 with strict exponent inequalities", from(frac),
        {{"gamma", gamma}, {"q*gamma", q * gamma}})
      .counted = false;
  Verdict size = Verdict::fail;
  std::string size_note;
  std::vector<Quantity> sq{{"C_sigma2", c2}};
  try {
    const auto mp = volterra::build_moment_problem(m, volterra::BoundMode::growth);
    const auto search = volterra::find_contraction_partition(mp.problem);
    const double rho = search.partition.rho;
    b.report.size_lhs = rho;
    sq.push_back({"lhs", rho});
    sq.push_back({"intervals", static_cast<double>(search.partition.intervals())});
    size = from(search.success && rho < 1.0);
    if (m.kernel.is_tabulated() && size == Verdict::fail) size = Verdict::undetermined;
    size_note = search.message;
  } catch (const std::exception& e) {
    size_note = e.what();
  }
  b.add("size_condition", "stability", p >= 1.0 ? "partition condition on the growth kernels (p >= 1)"
                                                 : "partition condition on the growth kernels (p < 1)",
        size, sq, size_note)
      .counted = false;
  Verdict branch = frac || size == Verdict::pass ? Verdict::pass
                   : size == Verdict::undetermined ? Verdict::undetermined
                                                   : Verdict::fail;
  b.add("stability_branch", "stability", "fractional branch or size condition holds", branch);
  return b.report;
}

Checker parse_checker(const std::string& name) {
  if (name == "auto" || name == "automatic") return Checker::automatic;
  if (name == "finite_horizon") return Checker::finite_horizon;
  if (name == "heavy_tail") return Checker::heavy_tail;
  if (name == "infinite_memory") return Checker::infinite_memory;
  if (name == "asymptotic_stability") return Checker::asymptotic_stability;
  throw std::invalid_argument("unknown checker '" + name + "'");
}

std::string to_string(Checker c) {
  switch (c) {
    case Checker::automatic:
      return "auto";
    case Checker::finite_horizon:
      return "finite_horizon";
    case Checker::heavy_tail:
      return "heavy_tail";
    case Checker::infinite_memory:
      return "infinite_memory";
    case Checker::asymptotic_stability:
      return "asymptotic_stability";
  }
  return "auto";
}

ConditionReport check(const ModelSpec& model, Checker which) {
  switch (which) {
    case Checker::automatic:
      return model.interval.whole_line() ? check_infinite_memory(model) : check_finite_horizon(model);
    case Checker::finite_horizon:
      return check_finite_horizon(model);
    case Checker::heavy_tail:
      return check_heavy_tail(model);
    case Checker::infinite_memory:
      return check_infinite_memory(model);
    case Checker::asymptotic_stability:
      return check_asymptotic_stability(model);
  }
  return check_finite_horizon(model);
}

}  // namespace lvx::wellposedness
