#include "lvx/kernels.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lvx/csv.hpp"
#include "quadrature.hpp"

namespace lvx::kernels {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double sphere_area(int d) { return 2.0 * std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0); }

// t = u^2/(1-u)^2 maps (0,1) onto (0,inf) and flattens t^{c} at the origin
double to_u(double t) {
  if (t == kInfinity) return 1.0;
  const double s = std::sqrt(t);
  return s / (1.0 + s);
}

// int_{t0}^{t1} f. When f(t) ~ t^c at the origin (c > -1 known), the piece
// [0, 1] is integrated in s = t^{1+c}, which removes the singularity;
// otherwise t = u^2/(1-u)^2 is used.
quad::Result time_integral(const std::function<double(double)>& f, double t0, double t1,
                           std::optional<double> c = std::nullopt) {
  if (!(t1 > t0)) return {};
  if (t0 == 0.0 && c) {
    const double k = 1.0 + *c;
    const double tm = std::min(t1, 1.0);
    auto h = [&](double s) {
      if (s <= 0.0) return 0.0;
      // the regularized integrand tends to a finite limit; freeze it below
      // the range where powers of the kernel peak would overflow
      const double t = std::max(std::pow(s, 1.0 / k), 1e-60);
      return f(t) * std::pow(t, -*c) / k;
    };
    quad::Result head = quad::endpoint(h, 0.0, std::pow(tm, k), 1e-13);
    if (t1 > tm) {
      quad::Result tail = time_integral(f, tm, t1);
      head.value += tail.value;
      head.error += tail.error;
    }
    return head;
  }
  if (t0 == 0.0) {
    auto h = [&](double u) {
      if (u <= 0.0 || u >= 1.0) return 0.0;
      const double w = 1.0 - u;
      const double t = u * u / (w * w);
      if (t < 1e-250) return 0.0;
      const double v = f(t);
      return v == 0.0 ? 0.0 : v * 2.0 * u / (w * w * w);
    };
    return quad::endpoint(h, 0.0, to_u(t1), 1e-13);
  }
  if (t1 == kInfinity) return quad::half_line(f, t0, 1e-13);
  return quad::endpoint(f, t0, t1, 1e-13);
}

// int_0^H e^{-eta t} int g_a^p dx dt in closed form; nullopt when not available
std::optional<double> heat_closed_form(double a, int d, double p, double horizon, double eta) {
  const double pd = (1.0 - p) * d / 2.0;
  const double pre = std::pow(4.0 * kPi, pd) * std::pow(p, -d / 2.0);
  const double rate = a * p + eta;
  if (rate > 0.0) {
    const double shape = 1.0 + pd;
    if (horizon == kInfinity) return pre * std::pow(rate, -shape) * std::tgamma(shape);
    return pre * std::pow(rate, -shape) * boost::math::tgamma_lower(shape, rate * horizon);
  }
  if (rate == 0.0 && horizon < kInfinity) return pre * std::pow(horizon, 1.0 + pd) / (1.0 + pd);
  return std::nullopt;
}

// g > 1 on the ball of squared radius 4 t h(t)
double heat_level(double a, int d, double t) { return -a * t - 0.5 * d * std::log(4.0 * kPi * t); }

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi / lo - 1.0 < 1e-15) break;
  }
  return std::sqrt(lo * hi);
}

// roots of the level function h on (0, horizon), sorted
std::vector<double> heat_level_roots(double a, int d, double horizon) {
  auto h = [&](double t) { return heat_level(a, d, t); };
  std::vector<double> roots;
  const double tiny = 1e-300;
  if (a >= 0.0) {
    double hi = 1.0 / (4.0 * kPi);
    if (h(hi) == 0.0) roots.push_back(hi);
    else roots.push_back(bisect(h, tiny, hi));
  } else {
    const double tm = d / (-2.0 * a);
    if (h(tm) < 0.0) {
      roots.push_back(bisect(h, tiny, tm));
      double hi = 2.0 * tm;
      while (h(hi) < 0.0) hi *= 2.0;
      roots.push_back(bisect(h, tm, hi));
    }
  }
  std::vector<double> out;
  for (double r : roots)
    if (r < horizon) out.push_back(r);
  return out;
}

double tab_interp(const Tabulated& tb, double t, double r) {
  const auto& ts = tb.times;
  const auto& rs = tb.radii;
  if (t < ts.front() || t > ts.back() || r < 0.0 || r > rs.back()) return 0.0;
  auto locate = [](const std::vector<double>& g, double v, std::size_t& i, double& w) {
    if (g.size() == 1) {
      i = 0;
      w = 0.0;
      return;
    }
    auto it = std::upper_bound(g.begin(), g.end(), v);
    std::size_t j = static_cast<std::size_t>(it - g.begin());
    if (j == 0) j = 1;
    if (j >= g.size()) j = g.size() - 1;
    i = j - 1;
    w = (v - g[i]) / (g[j] - g[i]);
  };
  std::size_t i, j;
  double wt, wr;
  locate(ts, t, i, wt);
  locate(rs, std::max(r, rs.front()), j, wr);
  const std::size_t nr = rs.size();
  auto at = [&](std::size_t a, std::size_t b) {
    a = std::min(a, ts.size() - 1);
    b = std::min(b, nr - 1);
    return tb.values[a * nr + b];
  };
  const double v0 = (1 - wr) * at(i, j) + wr * at(i, j + 1);
  const double v1 = (1 - wr) * at(i + 1, j) + wr * at(i + 1, j + 1);
  return (1 - wt) * v0 + wt * v1;
}

// int_{R^d} phi(g(t, |x|)) dx for a radial table, composite over the radii
double tab_radial_integral(const Tabulated& tb, double t, const std::function<double(double)>& phi) {
  if (tb.dimension == 0) return phi(tab_interp(tb, t, 0.0));
  const int d = tb.dimension;
  double acc = 0.0;
  const auto& rs = tb.radii;
  double prev = 0.0;
  for (std::size_t j = 0; j < rs.size(); ++j) {
    const double r1 = rs[j];
    if (r1 > prev) {
      acc += quad::gauss20(
          [&](double r) { return std::pow(r, d - 1) * phi(tab_interp(tb, t, r)); }, prev, r1);
    }
    prev = r1;
  }
  return sphere_area(d) * acc;
}

// composite rule in time over the table's time nodes
quad::Result tab_time_integral(const Tabulated& tb, double horizon, const std::function<double(double)>& f) {
  quad::Result out;
  const auto& ts = tb.times;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double a = std::max(0.0, ts[i]);
    const double b = std::min(horizon, ts[i + 1]);
    if (b > a) out.value += quad::gauss20(f, a, b);
  }
  out.error = 1e-8 * std::abs(out.value);
  return out;
}

// mean over [lo, hi] of exp(-c x^2)
double gaussian_box_mean(double c, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const double s = std::sqrt(c);
  double diff;
  if (lo >= 0.0)
    diff = std::erfc(lo * s) - std::erfc(hi * s);
  else if (hi <= 0.0)
    diff = std::erfc(-hi * s) - std::erfc(-lo * s);
  else
    diff = std::erf(hi * s) - std::erf(lo * s);
  return 0.5 * std::sqrt(kPi) / s * diff / (hi - lo);
}

void check_exponent(double p, const char* what) {
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument(std::string(what) + " must be > 0");
}

}  // namespace

Kernel::Kernel(Family family) : family_(std::move(family)) {
  std::visit(overloaded{
                 [](const Heat& h) {
                   if (h.dimension < 1) throw std::invalid_argument("heat kernel needs dimension >= 1");
                   if (!std::isfinite(h.damping)) throw std::invalid_argument("heat damping must be finite");
                 },
                 [](const Exponential& e) {
                   if (!std::isfinite(e.decay)) throw std::invalid_argument("decay rate must be finite");
                 },
                 [](const Tabulated& t) {
                   if (t.times.empty() || t.radii.empty() ||
                       t.values.size() != t.times.size() * t.radii.size())
                     throw std::invalid_argument("tabulated kernel needs a full (t, r) grid");
                   if (t.dimension < 0) throw std::invalid_argument("tabulated kernel dimension must be >= 0");
                   if (!std::is_sorted(t.times.begin(), t.times.end()) ||
                       !std::is_sorted(t.radii.begin(), t.radii.end()))
                     throw std::invalid_argument("tabulated kernel grid must be sorted");
                   if (t.times.front() < 0.0) throw std::invalid_argument("tabulated kernel times must be >= 0");
                   for (double v : t.values)
                     if (!(v >= 0.0)) throw std::invalid_argument("tabulated kernel values must be >= 0");
                 },
             },
             family_);
}

Kernel Kernel::from_csv(const std::string& path, int dimension) {
  const auto rows = csv::read_numeric(path);
  std::set<double> ts, rs;
  std::map<std::pair<double, double>, double> vals;
  for (const auto& row : rows) {
    if (row.size() < 3) throw std::invalid_argument(path + ": expected rows of t, |x|, value");
    ts.insert(row[0]);
    rs.insert(row[1]);
    vals[{row[0], row[1]}] = row[2];
  }
  Tabulated tb;
  tb.times.assign(ts.begin(), ts.end());
  tb.radii.assign(rs.begin(), rs.end());
  tb.dimension = dimension;
  for (double t : tb.times)
    for (double r : tb.radii) {
      auto it = vals.find({t, r});
      if (it == vals.end()) throw std::invalid_argument(path + ": kernel table is not a full grid");
      tb.values.push_back(it->second);
    }
  return Kernel(std::move(tb));
}

int Kernel::dimension() const {
  return std::visit(overloaded{
                        [](const Heat& h) { return h.dimension; },
                        [](const Exponential&) { return 0; },
                        [](const Tabulated& t) { return t.dimension; },
                    },
                    family_);
}

std::string Kernel::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Heat& h) { os << "heat(a=" << h.damping << ", d=" << h.dimension << ")"; },
                 [&](const Exponential& e) { os << "exponential(lambda=" << e.decay << ")"; },
                 [&](const Tabulated& t) {
                   os << "tabulated(" << t.times.size() << "x" << t.radii.size() << ", d=" << t.dimension << ")";
                 },
             },
             family_);
  return os.str();
}

double Kernel::radial(double t, double r) const {
  return std::visit(overloaded{
                        [&](const Heat& h) {
                          if (t <= 0.0) return 0.0;
                          return std::exp(-r * r / (4.0 * t) - h.damping * t) /
                                 std::pow(4.0 * kPi * t, h.dimension / 2.0);
                        },
                        [&](const Exponential& e) { return t < 0.0 ? 0.0 : std::exp(-e.decay * t); },
                        [&](const Tabulated& tb) { return t < 0.0 ? 0.0 : tab_interp(tb, t, r); },
                    },
                    family_);
}

double Kernel::operator()(double t, std::span<const double> x) const {
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return radial(t, std::sqrt(r2));
}

double Kernel::spatial_power(double t, double r) const {
  if (t < 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const Heat& h) {
                          if (t == 0.0) return 0.0;
                          const int d = h.dimension;
                          return std::exp(-h.damping * r * t) * std::pow(4.0 * kPi * t, (1.0 - r) * d / 2.0) *
                                 std::pow(r, -d / 2.0);
                        },
                        [&](const Exponential& e) { return std::exp(-e.decay * r * t); },
                        [&](const Tabulated& tb) {
                          return tab_radial_integral(tb, t, [r](double g) { return g > 0 ? std::pow(g, r) : 0.0; });
                        },
                    },
                    family_);
}

double Kernel::spatial_transform(double t, const std::function<double(double)>& phi) const {
  if (t < 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const Heat& h) {
                          if (t == 0.0) return 0.0;
                          const int d = h.dimension;
                          const double c = std::exp(-h.damping * t) / std::pow(4.0 * kPi * t, d / 2.0);
                          // peak overflows only for t below ~1e-200, a null set for any time integral
                          if (!std::isfinite(c)) return 0.0;
                          auto f = [&](double rho) {
                            const double g = c * std::exp(-rho * rho);
                            if (g == 0.0) return 0.0;
                            return std::pow(rho, d - 1) * phi(g);
                          };
                          // phi(g) is of power type, so the radial profile is Gaussian-like
                          // beyond the g = 1 sphere; integrate both sides separately
                          const double r1 = c > 1.0 ? std::sqrt(std::log(c)) : 0.0;
                          const double inner = r1 > 0.0 ? quad::smooth(f, 0.0, r1, 1e-10).value : 0.0;
                          const double outer = quad::half_line(f, r1, 1e-10).value;
                          // 0 * inf for huge t once c underflows
                          if (inner + outer == 0.0) return 0.0;
                          return sphere_area(d) * std::pow(2.0 * std::sqrt(t), d) * (inner + outer);
                        },
                        [&](const Exponential& e) { return phi(std::exp(-e.decay * t)); },
                        [&](const Tabulated& tb) { return tab_radial_integral(tb, t, phi); },
                    },
                    family_);
}

double Kernel::box_average_power(double t, std::span<const double> lo, std::span<const double> hi,
                                 double r) const {
  if (t <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const Heat& h) {
                          const int d = h.dimension;
                          double v = std::exp(-h.damping * r * t) * std::pow(4.0 * kPi * t, -r * d / 2.0);
                          const double c = r / (4.0 * t);
                          for (int i = 0; i < d; ++i) v *= gaussian_box_mean(c, lo[i], hi[i]);
                          return v;
                        },
                        [&](const Exponential& e) { return std::exp(-e.decay * r * t); },
                        [&](const Tabulated& tb) {
                          if (tb.dimension == 0) return std::pow(tab_interp(tb, t, 0.0), r);
                          // tensor Gauss-Legendre over the box
                          static constexpr double nodes[6] = {-0.9324695142031521, -0.6612093864662645,
                                                              -0.2386191860831969, 0.2386191860831969,
                                                              0.6612093864662645,  0.9324695142031521};
                          static constexpr double weights[6] = {0.1713244923791704, 0.3607615730481386,
                                                                0.4679139345726910, 0.4679139345726910,
                                                                0.3607615730481386, 0.1713244923791704};
                          const std::size_t d = lo.size();
                          std::vector<std::size_t> idx(d, 0);
                          double acc = 0.0;
                          while (true) {
                            double w = 1.0, r2 = 0.0;
                            for (std::size_t i = 0; i < d; ++i) {
                              const double x = 0.5 * (lo[i] + hi[i]) + 0.5 * (hi[i] - lo[i]) * nodes[idx[i]];
                              r2 += x * x;
                              w *= 0.5 * weights[idx[i]];
                            }
                            const double g = tab_interp(tb, t, std::sqrt(r2));
                            acc += w * (g > 0 ? std::pow(g, r) : 0.0);
                            std::size_t k = 0;
                            while (k < d && ++idx[k] == 6) idx[k++] = 0;
                            if (k == d) break;
                          }
                          return acc;
                        },
                    },
                    family_);
}

double evaluate(const Kernel& k, double t, std::span<const double> x) { return k(t, x); }

bool locally_p_integrable(const Kernel& k, double p) {
  if (const auto* h = std::get_if<Heat>(&k.family())) return p < 1.0 + 2.0 / h->dimension;
  return true;
}

KernelNorm lp_norm(const Kernel& k, double p, double horizon, NormMethod preferred) {
  check_exponent(p, "lp_norm exponent");
  if (!(horizon > 0.0)) return {0.0, NormMethod::closed_form, 0.0};
  return std::visit(
      overloaded{
          [&](const Heat& h) -> KernelNorm {
            const int d = h.dimension;
            if (p >= 1.0 + 2.0 / d) return {kInfinity, NormMethod::closed_form, 0.0};
            if (horizon == kInfinity && h.damping <= 0.0) return {kInfinity, NormMethod::closed_form, 0.0};
            if (preferred == NormMethod::closed_form) {
              if (auto v = heat_closed_form(h.damping, d, p, horizon, 0.0))
                return {*v, NormMethod::closed_form, 4e-16 * *v};
            }
            auto r = time_integral([&](double t) { return k.spatial_power(t, p); }, 0.0, horizon,
                                   (1.0 - p) * d / 2.0);
            return {r.value, NormMethod::quadrature, r.error};
          },
          [&](const Exponential& e) -> KernelNorm {
            const double rate = e.decay * p;
            if (horizon == kInfinity) {
              if (rate <= 0.0) return {kInfinity, NormMethod::closed_form, 0.0};
              return {1.0 / rate, NormMethod::closed_form, 0.0};
            }
            if (rate == 0.0) return {horizon, NormMethod::closed_form, 0.0};
            return {-std::expm1(-rate * horizon) / rate, NormMethod::closed_form, 0.0};
          },
          [&](const Tabulated& tb) -> KernelNorm {
            auto r = tab_time_integral(tb, horizon, [&](double t) { return k.spatial_power(t, p); });
            return {r.value, NormMethod::quadrature, r.error};
          },
      },
      k.family());
}

KernelNorm weighted_lp_norm(const Kernel& k, double p, double eta, NormMethod preferred) {
  check_exponent(p, "weighted_lp_norm exponent");
  const auto* h = std::get_if<Heat>(&k.family());
  if (!h) throw std::invalid_argument("weighted_lp_norm is defined for the heat family only");
  const int d = h->dimension;
  if (p >= 1.0 + 2.0 / d || h->damping * p + eta <= 0.0) return {kInfinity, NormMethod::closed_form, 0.0};
  if (preferred == NormMethod::closed_form) {
    const double v = *heat_closed_form(h->damping, d, p, kInfinity, eta);
    return {v, NormMethod::closed_form, 4e-16 * v};
  }
  auto r = time_integral([&](double t) { return std::exp(-eta * t) * k.spatial_power(t, p); }, 0.0, kInfinity,
                         (1.0 - p) * d / 2.0);
  return {r.value, NormMethod::quadrature, r.error};
}

KernelNorm truncated_lp_norm(const Kernel& k, double p, double q, double horizon, double eta) {
  check_exponent(p, "truncated_lp_norm exponent p");
  check_exponent(q, "truncated_lp_norm exponent q");
  if (!(horizon > 0.0)) return {0.0, NormMethod::closed_form, 0.0};
  return std::visit(
      overloaded{
          [&](const Heat& h) -> KernelNorm {
            const int d = h.dimension;
            const double a = h.damping;
            if (p >= 1.0 + 2.0 / d) return {kInfinity, NormMethod::closed_form, 0.0};
            if (p == q) {
              if (auto v = heat_closed_form(a, d, p, horizon, eta)) return {*v, NormMethod::closed_form, 4e-16 * *v};
            }
            if (horizon == kInfinity) {
              bool finite;
              if (a >= 0.0) {
                const double rate = a * q + eta;
                finite = rate > 0.0 || (rate == 0.0 && q > 1.0 + 2.0 / d);
              } else {
                finite = a * p + eta > 0.0;
              }
              if (!finite) return {kInfinity, NormMethod::closed_form, 0.0};
            }
            auto integrand = [&](double t) {
              if (t <= 0.0) return 0.0;
              const double lvl = heat_level(a, d, t);
              const double l4 = std::log(4.0 * kPi * t);
              auto part = [&](double e, bool inside) {
                const double ed = (1.0 - e) * d / 2.0;
                double frac = 1.0;
                if (lvl <= 0.0) {
                  if (inside) return 0.0;
                } else {
                  const double x = e * lvl;
                  frac = inside ? boost::math::gamma_p(d / 2.0, x) : boost::math::gamma_q(d / 2.0, x);
                  if (frac == 0.0) return 0.0;
                }
                return frac * std::exp(-(a * e + eta) * t + ed * l4) * std::pow(e, -d / 2.0);
              };
              return part(p, true) + part(q, false);
            };
            std::vector<double> cuts{0.0};
            for (double r : heat_level_roots(a, d, horizon)) cuts.push_back(r);
            cuts.push_back(horizon);
            quad::Result total;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
              auto r = time_integral(integrand, cuts[i], cuts[i + 1],
                                     i == 0 ? std::optional<double>((1.0 - p) * d / 2.0) : std::nullopt);
              total.value += r.value;
              total.error += r.error;
            }
            return {total.value, NormMethod::quadrature, total.error};
          },
          [&](const Exponential& e) -> KernelNorm {
            const double ex = e.decay < 0.0 ? p : q;
            const double rate = e.decay * ex + eta;
            if (horizon == kInfinity) {
              if (rate <= 0.0) return {kInfinity, NormMethod::closed_form, 0.0};
              return {1.0 / rate, NormMethod::closed_form, 0.0};
            }
            if (rate == 0.0) return {horizon, NormMethod::closed_form, 0.0};
            return {-std::expm1(-rate * horizon) / rate, NormMethod::closed_form, 0.0};
          },
          [&](const Tabulated& tb) -> KernelNorm {
            auto phi = [&](double g) { return g <= 0.0 ? 0.0 : (g > 1.0 ? std::pow(g, p) : std::pow(g, q)); };
            auto r = tab_time_integral(tb, horizon, [&](double t) {
              return std::exp(-eta * t) * tab_radial_integral(tb, t, phi);
            });
            return {r.value, NormMethod::quadrature, r.error};
          },
      },
      k.family());
}

KernelNorm transform_norm(const Kernel& k, const std::function<double(double)>& phi, double horizon,
                          double eta, std::optional<double> singular_exponent) {
  if (!(horizon > 0.0)) return {0.0, NormMethod::quadrature, 0.0};
  auto f = [&](double t) { return std::exp(-eta * t) * k.spatial_transform(t, phi); };
  quad::Result r;
  if (const auto* tb = std::get_if<Tabulated>(&k.family()))
    r = tab_time_integral(*tb, horizon, f);
  else if (k.is_heat()) {
    // phi usually kinks at g = 1, so split where the peak of G(t, .) crosses 1
    const auto& h = std::get<Heat>(k.family());
    auto log_peak = [&](double t) { return -h.damping * t - 0.5 * h.dimension * std::log(4.0 * kPi * t); };
    double lo = 1e-300, hi = 1.0;
    while (log_peak(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) (log_peak(0.5 * (lo + hi)) > 0.0 ? lo : hi) = 0.5 * (lo + hi);
    if (hi < horizon) {
      r = time_integral(f, 0.0, hi, singular_exponent);
      const auto tail = time_integral(f, hi, horizon);
      r.value += tail.value;
      r.error += tail.error;
    } else {
      r = time_integral(f, 0.0, horizon, singular_exponent);
    }
  }
  else if (horizon == kInfinity)
    r = quad::half_line(f, 0.0, 1e-12);
  else
    r = quad::smooth(f, 0.0, horizon, 1e-12);
  if (!std::isfinite(r.value)) return {kInfinity, NormMethod::quadrature, 0.0};
  return {r.value, NormMethod::quadrature, r.error};
}

}  // namespace lvx::kernels
