#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lvx/errors.hpp"
#include "lvx/volterra.hpp"
#include "lvx/wellposedness.hpp"

namespace lvx::volterra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VolterraKernel power_kernel(const ModelSpec& m, double coefficient, double power) {
  VolterraKernel k;
  k.base = m.kernel;
  k.coefficient = coefficient;
  k.power = power;
  return k;
}

VolterraKernel transform_kernel(const ModelSpec& m, double coefficient, std::function<double(double)> phi) {
  VolterraKernel k;
  k.base = m.kernel;
  k.coefficient = coefficient;
  k.transform = std::move(phi);
  return k;
}

// unweighted kernels together with the constants multiplying them inside
// the force (sigma(0) part) and inside the integral (v part)
struct KernelTerm {
  VolterraKernel kernel;
  double force_factor = 0.0;
  double solution_factor = 0.0;
};

// g^r m, with 0 when the moment vanishes (g may overflow near t = 0)
double scaled(double g, double r, double moment) { return moment == 0.0 ? 0.0 : std::pow(g, r) * moment; }

double mass_to(const VolterraKernel& k, double tau) {
  if (!(tau > 0.0)) return 0.0;
  return k.mass(tau);
}

// sup over the interval of int_0^{t - start} g
double kernel_mean(const ModelSpec& m) {
  return kernels::truncated_lp_norm(m.kernel, 1.0, 1.0, m.interval.length()).value;
}

double b1_or_throw(const ModelSpec& m) {
  const auto b1 = b1_sup(m.chars);
  if (!b1) throw NumericalFailure("moment bound needs a finite large-jump mean for p >= 1");
  return *b1;
}

// |Y0(t)|^p / w(t) and |Y0(t)| / w(t)^{1/p} both grow like e^{e t} with
// this exponent; the force is unbounded below when it is negative
double initial_exponent(const ModelSpec& m) {
  const double r = m.initial.kind == InitialKind::exponential ? m.initial.rate : 0.0;
  return m.p >= 1.0 ? r - m.eta / m.p : m.p * r - m.eta;
}

}  // namespace

MomentProblem build_moment_problem(const ModelSpec& model, BoundMode mode) {
  model.validate();
  const double p = model.p;
  const double eta = model.eta;
  const double start = model.interval.start;
  const auto lip = model.sigma.lipschitz_constant();
  if (mode == BoundMode::automatic) mode = lip ? BoundMode::lipschitz : BoundMode::growth;
  if (mode == BoundMode::lipschitz && !lip) throw std::invalid_argument("sigma has no global Lipschitz constant");

  const double s0 = std::abs(model.sigma.at_zero());
  const double cb = wellposedness::bdg_constant(p);
  const double c = model.chars.gaussian_variance;
  const double mod = model.chars.modulation.sup();
  const auto& jumps = model.chars.jumps;
  const bool whole = model.interval.whole_line();

  MomentProblem mp;
  mp.mode = mode;
  auto& pr = mp.problem;
  pr.start = start;
  pr.end = model.interval.end;
  pr.dimension = model.dimension();
  pr.force_spatially_constant = true;
  pr.p = std::max(p, 1.0);

  const auto kernel = model.kernel;
  const auto init = model.initial;
  const double outer = std::max(p, 1.0);
  auto v0 = [kernel, init, start, eta, p](double t) {
    const double y = std::abs(init(t, {}, kernel, start));
    return p >= 1.0 ? y * std::exp(-eta * t / p) : std::pow(y, p) * std::exp(-eta * t);
  };
  const bool initial_unbounded = whole && model.initial.value != 0.0 && initial_exponent(model) < 0.0;

  std::vector<KernelTerm> terms;
  double constant_term = 0.0;  // multiplies w(t)^{-1/outer}
  double solution_gamma = 1.0;

  if (mode == BoundMode::lipschitz) {
    const double C = *lip;
    const double zeta = jump_moment_sup(model.chars, p, p);
    if (p >= 1.0) {
      const double b1 = b1_or_throw(model);
      if (zeta + c > 0.0)
        terms.push_back({power_kernel(model, std::pow(cb, p) * (zeta + c), p), s0, C});
      if (b1 > 0.0) {
        const double mean = kernel_mean(model);
        const double pre = p == 1.0 ? 1.0 : std::pow(mean, p - 1.0);
        terms.push_back({power_kernel(model, std::pow(b1, p) * pre, 1.0), s0, C});
      }
    } else {
      if (c != 0.0) throw std::invalid_argument("p < 1 moment bounds need a noise without Gaussian part");
      if (!b0_vanishes(model.chars)) throw std::invalid_argument("p < 1 moment bounds need b0 = 0");
      if (zeta > 0.0) terms.push_back({power_kernel(model, zeta, p), std::pow(s0, p), std::pow(C, p)});
    }
  } else {
    const double gamma = model.sigma.growth_gamma();
    const double c2 = model.sigma.growth_coefficient();
    const double q = model.q;
    if (p >= 1.0) {
      const double b1 = b1_or_throw(model);
      if (b1 > 0.0) {
        const double mean = kernel_mean(model);
        const double pre = std::pow(2.0, p - 1.0) * (p == 1.0 ? 1.0 : std::pow(mean * b1, p - 1.0)) * b1;
        terms.push_back({power_kernel(model, pre, 1.0), s0 + c2, c2});
      }
      if (c > 0.0) terms.push_back({power_kernel(model, 2.0 * cb * cb * c, 2.0), s0 + c2, c2});
      if (!jumps.empty() && mod > 0.0) {
        terms.push_back({transform_kernel(model, std::pow(2.0, p - 1.0) * std::pow(cb, p) * mod,
                                          [jumps, p](double g) {
                                            if (!(g > 0.0)) return 0.0;
                                            return scaled(g, p, jumps.abs_moment(p, 1.0 / g, kInf));
                                          }),
                         s0 + c2, c2});
        terms.push_back({transform_kernel(model, std::pow(2.0, q - 1.0) * std::pow(cb, q) * mod,
                                          [jumps, q](double g) {
                                            if (!(g > 0.0)) return 0.0;
                                            return scaled(g, q, jumps.abs_moment(q, 0.0, 1.0 / g));
                                          }),
                         s0 + c2, c2});
      }
      constant_term = 2.0 * (1.0 + s0 + c2);
      const double frac = std::max(q, c != 0.0 ? 2.0 : 0.0) * gamma / p;
      if (frac < 1.0 && eta == 0.0) solution_gamma = frac;
    } else {
      const auto env = resolve_drift_envelope(model.chars, model.drift, p);
      const double ab = std::max(*env.alpha, *env.beta);
      const double F = std::max(*env.f0, *env.f1);
      if (F > 0.0) {
        VolterraKernel k = power_kernel(model, std::pow(2.0, std::max(ab, 1.0) - 1.0) * F, *env.alpha);
        k.small_power = *env.beta;
        terms.push_back({k, levy::truncated_power(s0, ab, 0.0) + std::pow(c2, ab), std::pow(c2, ab)});
      }
      if (c > 0.0)
        terms.push_back({power_kernel(model, std::pow(2.0, p + 1.0) * c, 2.0), levy::truncated_power(s0, 2.0, 0.0) + c2 * c2,
                         c2 * c2});
      if (!jumps.empty() && mod > 0.0) {
        terms.push_back({transform_kernel(model, std::pow(2.0, p) * std::pow(2.0, std::max(q, 1.0) - 1.0) * mod,
                                          [jumps, p, q](double g) {
                                            if (!(g > 0.0)) return 0.0;
                                            return scaled(g, p, jumps.abs_moment(p, 1.0 / g, kInf)) +
                                                   scaled(g, q, jumps.abs_moment(q, 0.0, 1.0 / g));
                                          }),
                         levy::truncated_power(s0, 1.0, 0.0) + c2, c2});
      }
      constant_term = std::pow(2.0, p + 1.0) + 1.0;
      const double frac = std::max({q, c != 0.0 ? 2.0 : 0.0, ab}) * gamma / p;
      if (frac < 1.0 && eta == 0.0) solution_gamma = frac;
    }
  }
  pr.gamma = solution_gamma;

  // sigma(0) contributions integrate the unweighted kernel over [start, t]
  std::vector<VolterraKernel> plain;
  std::vector<double> force_factors;
  double force_total = constant_term;
  for (const auto& t : terms) {
    plain.push_back(t.kernel);
    force_factors.push_back(t.force_factor);
    force_total += t.force_factor;
  }
  const bool lipschitz_p1 = mode == BoundMode::lipschitz && p >= 1.0;
  const double C = lip.value_or(0.0);

  // Lipschitz with p >= 1: (sigma0 + C v w^{1/p})^p = C^p w (v + shift)^p
  if (lipschitz_p1 && C > 0.0) {
    auto shift = [s0, C, eta, p](double t) { return s0 / C * std::exp(-eta * t / p); };
    mp.shift = shift;
    pr.force = [v0, shift](double t, std::span<const double>) { return v0(t) + shift(t); };
    for (auto t : terms) {
      t.kernel.coefficient *= std::pow(C, p);
      t.kernel.decay = eta;
      pr.kernels.push_back(t.kernel);
    }
    pr.force_unbounded_below = initial_unbounded || (whole && s0 > 0.0 && eta > 0.0);
    return mp;
  }

  // remaining cases: force v0 + const w^{-1/outer} + w^{-1/outer} * sum_l factor_l M_l(t - start)^{1/outer}
  const bool sum_outside = p >= 1.0;
  pr.force = [v0, plain, force_factors, constant_term, start, eta, outer, sum_outside](double t,
                                                                                       std::span<const double>) {
    const double tau = t - start;
    const double wi = std::exp(-eta * t / outer);
    double acc = constant_term;
    for (std::size_t l = 0; l < plain.size(); ++l) {
      if (force_factors[l] == 0.0) continue;
      const double m = mass_to(plain[l], tau);
      acc += force_factors[l] * (sum_outside ? std::pow(m, 1.0 / outer) : m);
    }
    return v0(t) + wi * acc;
  };
  for (const auto& t : terms) {
    if (t.solution_factor == 0.0) continue;
    VolterraKernel k = t.kernel;
    k.coefficient *= sum_outside ? std::pow(t.solution_factor, outer) : t.solution_factor;
    k.decay = eta;
    pr.kernels.push_back(k);
  }
  mp.linear_only = pr.kernels.empty();
  pr.force_unbounded_below = initial_unbounded || (whole && eta > 0.0 && force_total > 0.0);
  return mp;
}

Field moment_bound(const ModelSpec& model, const FieldGrid& grid, const MomentBoundOptions& opts,
                   std::vector<TraceEntry>* trace) {
  MomentProblem mp = build_moment_problem(model, opts.mode);
  // values up to the last grid time depend only on the past
  if (!grid.times.empty())
    mp.problem.end = std::min(mp.problem.end, *std::max_element(grid.times.begin(), grid.times.end()));
  Field out;
  out.grid = grid;
  out.eta = model.eta;
  const std::size_t sp = grid.space_points();
  if (mp.problem.whole_line() && mp.problem.force_unbounded_below) {
    out.divergent = true;
    out.values.assign(grid.size(), kInf);
    return out;
  }
  if (mp.linear_only) {
    out.values.resize(grid.size());
    for (std::size_t ti = 0; ti < grid.times.size(); ++ti) {
      const double t = grid.times[ti];
      const double v = mp.problem.force(t, {}) - mp.shift(t);
      for (std::size_t si = 0; si < sp; ++si) out.values[ti * sp + si] = v;
    }
    return out;
  }
  auto res = picard_solve(mp.problem, grid, opts.picard);
  if (trace) *trace = res.trace;
  out.values = std::move(res.solution.values);
  for (std::size_t ti = 0; ti < grid.times.size(); ++ti) {
    const double s = mp.shift(grid.times[ti]);
    for (std::size_t si = 0; si < sp; ++si) out.values[ti * sp + si] = std::max(0.0, out.values[ti * sp + si] - s);
  }
  return out;
}

}  // namespace lvx::volterra
