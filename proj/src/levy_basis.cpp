#include "lvx/levy_basis.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "quadrature.hpp"

namespace lvx::levy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void validate_family(const JumpMeasure::Family& f) {
  std::visit(overloaded{
                 [](const NoJumps&) {},
                 [](const PointMasses& pm) {
                   for (const auto& a : pm.atoms) {
                     if (!std::isfinite(a.size) || a.size == 0.0)
                       throw std::invalid_argument("point mass size must be finite and nonzero");
                     if (!(a.rate >= 0.0) || !std::isfinite(a.rate))
                       throw std::invalid_argument("point mass rate must be finite and >= 0");
                   }
                 },
                 [](const ExponentialTails& e) {
                   if (!(e.rate > 0.0)) throw std::invalid_argument("exponential tail rate must be > 0");
                   if (!(e.intensity >= 0.0)) throw std::invalid_argument("exponential intensity must be >= 0");
                 },
                 [](const AlphaStable& s) {
                   if (!(s.index > 0.0 && s.index < 2.0))
                     throw std::invalid_argument("stable index must lie in (0,2)");
                   if (!(s.scale >= 0.0)) throw std::invalid_argument("stable scale must be >= 0");
                   if (!(std::abs(s.skew) <= 1.0)) throw std::invalid_argument("stable skew must lie in [-1,1]");
                   if (s.index == 1.0 && s.skew != 0.0)
                     throw std::invalid_argument("stable index 1 is supported only with zero skew");
                 },
                 [](const TabulatedJumps& t) {
                   if (t.sizes.size() < 2 || t.sizes.size() != t.density.size())
                     throw std::invalid_argument("jump table needs >= 2 matching (size, density) rows");
                   for (std::size_t i = 0; i < t.sizes.size(); ++i) {
                     if (i > 0 && !(t.sizes[i] > t.sizes[i - 1]))
                       throw std::invalid_argument("jump table sizes must increase strictly");
                     if (!(t.density[i] >= 0.0) || !std::isfinite(t.density[i]))
                       throw std::invalid_argument("jump table densities must be finite and >= 0");
                   }
                 },
             },
             f);
}

double stable_norm(double alpha) {
  if (alpha == 1.0) return std::numbers::pi / 2.0;
  return -std::tgamma(-alpha) * std::cos(std::numbers::pi * alpha / 2.0);
}

// int_lo^hi z^e dz for 0 <= lo < hi <= inf, with divergence reported as inf
double power_integral(double e, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  if (e == -1.0) {
    if (lo == 0.0 || hi == kInf) return kInf;
    return std::log(hi / lo);
  }
  const double k = e + 1.0;
  if (k > 0.0) {
    if (hi == kInf) return kInf;
    return (std::pow(hi, k) - std::pow(lo, k)) / k;
  }
  if (lo == 0.0) return kInf;
  const double top = hi == kInf ? 0.0 : std::pow(hi, k);
  return (top - std::pow(lo, k)) / k;
}

double tabulated_density(const TabulatedJumps& t, double z) {
  if (z < t.sizes.front() || z > t.sizes.back()) return 0.0;
  auto it = std::upper_bound(t.sizes.begin(), t.sizes.end(), z);
  if (it == t.sizes.end()) return t.density.back();
  const std::size_t i = static_cast<std::size_t>(it - t.sizes.begin());
  const double w = (z - t.sizes[i - 1]) / (t.sizes[i] - t.sizes[i - 1]);
  return (1.0 - w) * t.density[i - 1] + w * t.density[i];
}

// int over {lo < |z| <= hi} of f(z) * density(z)
double tabulated_integral(const TabulatedJumps& t, double lo, double hi,
                          const std::function<double(double)>& f) {
  std::vector<double> cuts(t.sizes.begin(), t.sizes.end());
  for (double c : {0.0, lo, -lo, hi, -hi})
    if (std::isfinite(c) && c > t.sizes.front() && c < t.sizes.back()) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double u = cuts[i], v = cuts[i + 1];
    const double mid = std::abs(0.5 * (u + v));
    if (!(mid > lo && mid <= hi)) continue;
    auto g = [&](double z) { return f(z) * tabulated_density(t, z); };
    if (u == 0.0 || v == 0.0)
      total += quad::endpoint(g, u, v, 1e-10).value;
    else
      total += quad::gauss20(g, u, v);
  }
  return total;
}

// int_{k lo}^{k hi} u^a e^{-u} du
double incomplete_gamma_window(double a, double x_lo, double x_hi) {
  namespace bm = boost::math;
  if (a > 0.0) {
    if (x_hi == kInf) return bm::tgamma(a, x_lo);
    if (x_lo < 1.0) return bm::tgamma_lower(a, x_hi) - bm::tgamma_lower(a, x_lo);
    return bm::tgamma(a, x_lo) - bm::tgamma(a, x_hi);
  }
  if (x_lo == 0.0) return kInf;
  auto f = [a](double u) { return std::pow(u, a - 1.0) * std::exp(-u); };
  if (x_hi == kInf) return quad::half_line(f, x_lo).value;
  return quad::smooth(f, x_lo, x_hi).value;
}

}  // namespace

JumpMeasure::JumpMeasure(Family family) : family_(std::move(family)) { validate_family(family_); }

std::string JumpMeasure::name() const {
  return std::visit(overloaded{
                        [](const NoJumps&) { return std::string("none"); },
                        [](const PointMasses&) { return std::string("point_masses"); },
                        [](const ExponentialTails&) { return std::string("exponential"); },
                        [](const AlphaStable&) { return std::string("alpha_stable"); },
                        [](const TabulatedJumps&) { return std::string("tabulated"); },
                    },
                    family_);
}

bool JumpMeasure::empty() const {
  return std::visit(overloaded{
                        [](const NoJumps&) { return true; },
                        [](const PointMasses& pm) {
                          return std::all_of(pm.atoms.begin(), pm.atoms.end(),
                                             [](const PointMass& a) { return a.rate == 0.0; });
                        },
                        [](const ExponentialTails& e) { return e.intensity == 0.0; },
                        [](const AlphaStable& s) { return s.scale == 0.0; },
                        [](const TabulatedJumps& t) {
                          return std::all_of(t.density.begin(), t.density.end(),
                                             [](double d) { return d == 0.0; });
                        },
                    },
                    family_);
}

bool JumpMeasure::symmetric() const {
  return std::visit(
      overloaded{
          [](const NoJumps&) { return true; },
          [](const PointMasses& pm) {
            std::map<double, double> net;
            for (const auto& a : pm.atoms) net[std::abs(a.size)] += a.size > 0 ? a.rate : -a.rate;
            return std::all_of(net.begin(), net.end(), [](const auto& kv) {
              return std::abs(kv.second) <= 1e-12 * (1.0 + std::abs(kv.first));
            });
          },
          [](const ExponentialTails& e) { return e.two_sided || e.intensity == 0.0; },
          [](const AlphaStable& s) { return s.skew == 0.0 || s.scale == 0.0; },
          [](const TabulatedJumps& t) {
            for (double z : t.sizes) {
              const double a = tabulated_density(t, z), b = tabulated_density(t, -z);
              if (std::abs(a - b) > 1e-12 * (1.0 + std::max(a, b))) return false;
            }
            return true;
          },
      },
      family_);
}

std::pair<double, double> JumpMeasure::stable_constants() const {
  const auto* s = std::get_if<AlphaStable>(&family_);
  if (!s) return {0.0, 0.0};
  const double total = std::pow(s->scale, s->index) / stable_norm(s->index);
  return {0.5 * total * (1.0 + s->skew), 0.5 * total * (1.0 - s->skew)};
}

double JumpMeasure::abs_moment(double r, double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  return std::visit(
      overloaded{
          [](const NoJumps&) { return 0.0; },
          [&](const PointMasses& pm) {
            double sum = 0.0;
            for (const auto& a : pm.atoms) {
              const double m = std::abs(a.size);
              if (m > lo && m <= hi && a.rate > 0.0) sum += a.rate * std::pow(m, r);
            }
            return sum;
          },
          [&](const ExponentialTails& e) {
            if (e.intensity == 0.0) return 0.0;
            return e.intensity * std::pow(e.rate, -r) *
                   incomplete_gamma_window(r + 1.0, e.rate * lo, hi == kInf ? kInf : e.rate * hi);
          },
          [&](const AlphaStable& s) {
            const auto [cp, cm] = stable_constants();
            if (cp + cm == 0.0) return 0.0;
            return (cp + cm) * power_integral(r - 1.0 - s.index, lo, hi);
          },
          [&](const TabulatedJumps& t) {
            if (lo == 0.0 && r <= -1.0 && tabulated_density(t, 0.0) > 0.0) return kInf;
            return tabulated_integral(t, lo, hi, [r](double z) { return std::pow(std::abs(z), r); });
          },
      },
      family_);
}

std::optional<double> JumpMeasure::signed_moment(double lo, double hi) const {
  const double a = abs_moment(1.0, lo, hi);
  if (!std::isfinite(a)) return std::nullopt;
  return std::visit(
      overloaded{
          [](const NoJumps&) { return 0.0; },
          [&](const PointMasses& pm) {
            double sum = 0.0;
            for (const auto& p : pm.atoms) {
              const double m = std::abs(p.size);
              if (m > lo && m <= hi) sum += p.rate * p.size;
            }
            return sum;
          },
          [&](const ExponentialTails& e) { return e.two_sided ? 0.0 : a; },
          [&](const AlphaStable& s) { return a == 0.0 ? 0.0 : s.skew * a; },
          [&](const TabulatedJumps& t) {
            return tabulated_integral(t, lo, hi, [](double z) { return z; });
          },
      },
      family_);
}

double SpatialModulation::operator()(const std::vector<double>& x) const {
  switch (kind) {
    case ModulationKind::none:
      return 1.0;
    case ModulationKind::constant:
      return value;
    case ModulationKind::compact: {
      for (double xi : x)
        if (std::abs(xi) > radius) return 0.0;
      return value;
    }
    case ModulationKind::power: {
      double n2 = 0.0;
      for (double xi : x) n2 += xi * xi;
      return value * std::pow(std::max(1.0, std::sqrt(n2)), -exponent);
    }
  }
  return 1.0;
}

double SpatialModulation::sup() const { return kind == ModulationKind::none ? 1.0 : value; }

double SpatialModulation::cell_average(const std::vector<double>& lower,
                                       const std::vector<double>& upper) const {
  if (kind == ModulationKind::none) return 1.0;
  if (kind == ModulationKind::constant || lower.empty()) return value;
  if (kind == ModulationKind::compact) {
    double frac = 1.0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
      const double w = upper[i] - lower[i];
      if (w <= 0.0) return 0.0;
      const double o = std::max(0.0, std::min(upper[i], radius) - std::max(lower[i], -radius));
      frac *= o / w;
    }
    return value * frac;
  }
  // tensor 4-point Gauss-Legendre average for the power profile
  static constexpr double nodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                      0.8611363115940526};
  static constexpr double weights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                        0.3478548451374538};
  const std::size_t d = lower.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = 0.5 * (lower[i] + upper[i]), h = 0.5 * (upper[i] - lower[i]);
      x[i] = c + h * nodes[idx[i]];
      w *= 0.5 * weights[idx[i]];
    }
    acc += w * (*this)(x);
    std::size_t k = 0;
    while (k < d && ++idx[k] == 4) idx[k++] = 0;
    if (k == d) break;
  }
  return acc;
}

bool SpatialModulation::integrable(int dim) const {
  if (dim == 0) return true;
  switch (kind) {
    case ModulationKind::none:
      return false;
    case ModulationKind::constant:
      return value == 0.0;
    case ModulationKind::compact:
      return true;
    case ModulationKind::power:
      return value == 0.0 || exponent > dim;
  }
  return false;
}

bool LevyCharacteristics::symmetric() const { return drift == 0.0 && jumps.symmetric(); }

void LevyCharacteristics::validate() const {
  if (!(gaussian_variance >= 0.0)) throw std::invalid_argument("gaussian variance must be >= 0");
  if (!std::isfinite(drift)) throw std::invalid_argument("drift must be finite");
  if (!(small_jump_cutoff > 0.0 && small_jump_cutoff <= 1.0))
    throw std::invalid_argument("small jump cutoff must lie in (0,1]");
  if (modulation.kind != ModulationKind::none && !(modulation.value >= 0.0))
    throw std::invalid_argument("modulation value must be >= 0");
  if (declared_symmetric && !symmetric())
    throw std::invalid_argument("characteristics declared symmetric but drift or jumps are not");
}

double Cell::volume() const {
  double v = t_hi - t_lo;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

double truncated_power(double z, double r, double s) {
  const double m = std::abs(z);
  return m > 1.0 ? std::pow(m, r) : std::pow(m, s);
}

double jump_moment(const JumpMeasure& jumps, double r, double s) {
  const double small = jumps.abs_moment(s, 0.0, 1.0);
  const double large = jumps.abs_moment(r, 1.0, kInf);
  return small + large;
}

EffectiveDrifts effective_drifts(const LevyCharacteristics& chars) {
  EffectiveDrifts out;
  if (auto large = chars.jumps.signed_moment(1.0, kInf)) out.b1 = chars.drift + *large;
  if (auto small = chars.jumps.signed_moment(0.0, 1.0)) out.b0 = chars.drift - *small;
  return out;
}

double sample_stable(double alpha, double beta, double scale, CellStream& stream) {
  const double pi = std::numbers::pi;
  const double u = pi * (stream.uniform() - 0.5);
  const double w = -std::log(stream.uniform());
  if (alpha == 1.0) return scale * std::tan(u);
  const double t = beta * std::tan(pi * alpha / 2.0);
  const double b = std::atan(t) / alpha;
  const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
  const double x = s * std::sin(alpha * (u + b)) / std::pow(std::cos(u), 1.0 / alpha) *
                   std::pow(std::cos(u - alpha * (u + b)) / w, (1.0 - alpha) / alpha);
  return scale * x;
}

namespace {

// one jump from pi0 restricted to {|z| > eps}, normalized
double draw_large_jump(const JumpMeasure& jm, double eps, CellStream& stream) {
  return std::visit(
      overloaded{
          [](const NoJumps&) { return 0.0; },
          [&](const PointMasses& pm) {
            double total = 0.0;
            for (const auto& a : pm.atoms)
              if (std::abs(a.size) > eps) total += a.rate;
            double u = stream.uniform() * total;
            double last = 0.0;
            for (const auto& a : pm.atoms) {
              if (std::abs(a.size) <= eps) continue;
              last = a.size;
              if ((u -= a.rate) <= 0.0) return a.size;
            }
            return last;
          },
          [&](const ExponentialTails& e) {
            const double m = eps - std::log(stream.uniform()) / e.rate;
            if (!e.two_sided) return m;
            return stream.uniform() < 0.5 ? -m : m;
          },
          [](const AlphaStable&) { return 0.0; },
          [&](const TabulatedJumps& t) {
            std::vector<double> xs, ds;
            for (std::size_t i = 0; i < t.sizes.size(); ++i) {
              xs.push_back(t.sizes[i]);
              ds.push_back(std::abs(t.sizes[i]) > eps ? t.density[i] : 0.0);
            }
            for (double c : {-eps, eps}) {
              if (c <= t.sizes.front() || c >= t.sizes.back()) continue;
              auto it = std::lower_bound(xs.begin(), xs.end(), c);
              const auto pos = it - xs.begin();
              if (it != xs.end() && *it == c) {
                ds[pos] = tabulated_density(t, c);
                continue;
              }
              // split the node: zero just inside, full density just outside
              const double d = tabulated_density(t, c);
              const double in = std::nextafter(c, 0.0);
              if (c < 0) {
                xs.insert(xs.begin() + pos, {c, in});
                ds.insert(ds.begin() + pos, {d, 0.0});
              } else {
                xs.insert(xs.begin() + pos, {in, c});
                ds.insert(ds.begin() + pos, {0.0, d});
              }
            }
            for (std::size_t i = 0; i < xs.size(); ++i)
              if (std::abs(xs[i]) < eps) ds[i] = 0.0;
            std::piecewise_linear_distribution<double> dist(xs.begin(), xs.end(), ds.begin());
            return dist(stream);
          },
      },
      jm.family());
}

}  // namespace

NoiseIncrement sample_cell(const LevyCharacteristics& chars, const Cell& cell, CellStream& stream) {
  const double v = cell.volume();
  if (v < 0.0) throw std::invalid_argument("cell volume must be >= 0");
  NoiseIncrement out{0.0, cell};
  if (v == 0.0) return out;

  double value = chars.drift * v;
  double variance = chars.gaussian_variance * v;
  const double eps = chars.small_jump_cutoff;
  const double scale_v = v * chars.modulation.cell_average(cell.lower, cell.upper);

  const JumpMeasure& jm = chars.jumps;
  if (scale_v > 0.0 && !jm.empty()) {
    if (const auto* s = std::get_if<AlphaStable>(&jm.family())) {
      const auto [cp, cm] = jm.stable_constants();
      value += sample_stable(s->index, s->skew, s->scale * std::pow(scale_v, 1.0 / s->index), stream);
      if (s->index < 1.0)
        value -= scale_v * (cp - cm) / (1.0 - s->index);
      else if (s->index > 1.0)
        value += scale_v * (cp - cm) / (s->index - 1.0);
    } else {
      variance += scale_v * jm.abs_moment(2.0, 0.0, eps);
      const double intensity = scale_v * jm.abs_moment(0.0, eps, kInf);
      if (intensity > 0.0) {
        std::poisson_distribution<long> count(intensity);
        const long n = count(stream);
        for (long i = 0; i < n; ++i) value += draw_large_jump(jm, eps, stream);
      }
      if (eps < 1.0) value -= scale_v * jm.signed_moment(eps, 1.0).value_or(0.0);
    }
  }
  if (variance > 0.0) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance));
    value += normal(stream);
  }
  out.value = value;
  return out;
}

}  // namespace lvx::levy
