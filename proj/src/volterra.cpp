#include "lvx/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lvx/csv.hpp"
#include "lvx/errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace lvx::volterra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_binom_term(double rho, std::size_t k, int m) {
  return std::lgamma(m + static_cast<double>(k)) - std::lgamma(m + 1.0) - std::lgamma(static_cast<double>(k)) +
         m * std::log(rho);
}

// sum_{m >= n} binom(m+k-1, m) rho^m
double binom_tail(double rho, std::size_t k, int n) {
  if (rho <= 0.0) return n == 0 ? 1.0 : 0.0;
  if (rho >= 1.0) return kInf;
  double sum = 0.0;
  for (int m = n; m < n + 1000000; ++m) {
    const double t = std::exp(log_binom_term(rho, k, m));
    sum += t;
    const bool decreasing = (m + static_cast<double>(k)) * rho < m + 1.0;
    if (decreasing && t <= 1e-17 * sum) break;
  }
  return sum;
}

double binom_term(double rho, std::size_t k, int n) {
  if (n == 0) return 1.0;
  if (rho <= 0.0) return 0.0;
  return std::exp(log_binom_term(rho, k, n));
}

// sum_l ( int_{a}^{b} H_l(t - s) ds )^{1/p} evaluated as masses of lags
double window_sum(const VolterraProblem& pr, double lag_hi, double lag_lo) {
  double s = 0.0;
  for (const auto& k : pr.kernels) {
    const double m = k.mass(lag_hi) - (lag_lo > 0.0 ? k.mass(lag_lo) : 0.0);
    s += std::pow(std::max(m, 0.0), 1.0 / pr.p);
  }
  return s;
}

double total_mass_sum(const VolterraProblem& pr) {
  double s = 0.0;
  for (const auto& k : pr.kernels) s += std::pow(k.mass(kInf), 1.0 / pr.p);
  return s;
}

// samples of F(tau) = window_sum(tau, tau - len) for one interval length
struct WindowProfile {
  std::vector<double> taus;
  std::vector<double> values;
};

WindowProfile window_profile(const VolterraProblem& pr, double len, double range) {
  WindowProfile prof;
  prof.taus.push_back(std::min(len, range));
  prof.values.push_back(window_sum(pr, prof.taus.back(), 0.0));
  if (range <= len) return prof;
  const double cap = std::min(range, 33.0 * len);
  const int samples = 256;
  for (int m = 1; m <= samples; ++m) {
    const double tau = len + (cap - len) * m / samples;
    prof.taus.push_back(tau);
    prof.values.push_back(window_sum(pr, tau, tau - len));
  }
  // golden-section refinement around the best interior sample
  auto best = std::max_element(prof.values.begin(), prof.values.end()) - prof.values.begin();
  if (best > 0 && best + 1 < static_cast<long>(prof.taus.size())) {
    double lo = prof.taus[best - 1], hi = prof.taus[best + 1];
    auto F = [&](double tau) { return window_sum(pr, tau, std::max(0.0, tau - len)); };
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = F(x1), f2 = F(x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 > f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = F(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = F(x2);
      }
    }
    prof.taus.push_back(0.5 * (lo + hi));
    prof.values.push_back(std::max(f1, f2));
  }
  return prof;
}

struct TimeMesh {
  double t0 = 0.0;
  double h = 1.0;
  std::size_t n = 0;  // steps; nodes t0 + i h for i = 0..n
  double at(std::size_t i) const { return t0 + static_cast<double>(i) * h; }
};

struct KernelWeights {
  std::vector<double> a;     // weight of u(t_i - k h), lag cell k
  std::vector<double> b;     // weight of u(t_i - (k+1) h)
  std::vector<double> tail;  // clamped history mass beyond lag i h
};

KernelWeights time_weights(const VolterraKernel& k, const TimeMesh& mesh, bool whole_line) {
  KernelWeights w;
  const double h = mesh.h;
  w.a.assign(mesh.n, 0.0);
  w.b.assign(mesh.n, 0.0);
  auto H = [&](double tau) { return k.density(tau); };
  if (mesh.n > 0) {
    const double m0 = k.mass(h);
    const double b0 = quad::endpoint([&](double tau) { return tau / h * H(tau); }, 0.0, h, 1e-10).value;
    w.a[0] = m0 - b0;
    w.b[0] = b0;
  }
  for (std::size_t j = 1; j < mesh.n; ++j) {
    const double lo = static_cast<double>(j) * h;
    const double total = quad::gauss20(H, lo, lo + h);
    const double bj = quad::gauss20([&](double tau) { return (tau - lo) / h * H(tau); }, lo, lo + h);
    w.a[j] = total - bj;
    w.b[j] = bj;
  }
  w.tail.assign(mesh.n + 1, 0.0);
  if (whole_line) {
    const double total = k.mass(kInf);
    double cum = 0.0;
    for (std::size_t i = 0; i <= mesh.n; ++i) {
      w.tail[i] = std::max(0.0, total - cum);
      if (i < mesh.n) cum += w.a[i] + w.b[i];
    }
  }
  return w;
}

std::vector<double> interpolate(const TimeMesh& mesh, const std::vector<double>& v, const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const double x = (t - mesh.t0) / mesh.h;
    if (x <= 0.0) {
      out.push_back(v.front());
      continue;
    }
    const std::size_t i = std::min(static_cast<std::size_t>(x), mesh.n);
    if (i >= mesh.n) {
      out.push_back(v[mesh.n]);
      continue;
    }
    const double fr = x - static_cast<double>(i);
    out.push_back(fr < 1e-9 ? v[i] : (1.0 - fr) * v[i] + fr * v[i + 1]);
  }
  return out;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

double VolterraKernel::phi(double g) const {
  if (!(g > 0.0)) return 0.0;
  if (transform) return transform(g);
  return g > 1.0 ? std::pow(g, power) : std::pow(g, small_power.value_or(power));
}

double VolterraKernel::density(double tau) const {
  if (!(tau > 0.0) || coefficient == 0.0) return 0.0;
  const double damp = decay == 0.0 ? 1.0 : std::exp(-decay * tau);
  if (pure_power()) return coefficient * damp * base.spatial_power(tau, power);
  return coefficient * damp * base.spatial_transform(tau, [this](double g) { return phi(g); });
}

double VolterraKernel::mass(double tau) const {
  if (!(tau > 0.0) || coefficient == 0.0) return 0.0;
  if (pure_power()) return coefficient * kernels::truncated_lp_norm(base, power, power, tau, decay).value;
  if (!transform && power > 0.0 && small_power && *small_power > 0.0)
    return coefficient * kernels::truncated_lp_norm(base, power, *small_power, tau, decay).value;
  return coefficient *
         kernels::transform_norm(base, [this](double g) { return phi(g); }, tau, decay, singular_exponent()).value;
}

double VolterraKernel::box_mass(double tau, std::span<const double> lo, std::span<const double> hi) const {
  if (!pure_power()) throw std::invalid_argument("box integrals need a pure power kernel");
  if (!(tau > 0.0) || coefficient == 0.0) return 0.0;
  double vol = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) vol *= hi[i] - lo[i];
  const double damp = decay == 0.0 ? 1.0 : std::exp(-decay * tau);
  return coefficient * damp * vol * base.box_average_power(tau, lo, hi, power);
}

std::optional<double> VolterraKernel::singular_exponent() const {
  if (const auto* h = std::get_if<kernels::Heat>(&base.family())) {
    if (transform) return std::nullopt;
    return (1.0 - power) * h->dimension / 2.0;
  }
  if (std::holds_alternative<kernels::Exponential>(base.family())) return 0.0;
  return std::nullopt;
}

bool VolterraProblem::whole_line() const { return start == -kInf; }

void VolterraProblem::validate() const {
  if (!(p >= 1.0)) throw std::invalid_argument("Volterra exponent p must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("growth gamma must lie in (0, 1]");
  if (!(end > start)) throw std::invalid_argument("Volterra interval must be nonempty");
  if (!force) throw std::invalid_argument("Volterra force is not set");
  for (const auto& k : kernels) {
    if (!(k.coefficient >= 0.0)) throw std::invalid_argument("Volterra kernels must be nonnegative");
    if (k.base.dimension() != dimension) throw std::invalid_argument("kernel dimension does not match the problem");
  }
}

FieldGrid FieldGrid::uniform_time(double t0, double t1, std::size_t steps) {
  FieldGrid g;
  for (std::size_t i = 0; i <= steps; ++i)
    g.times.push_back(steps == 0 ? t0 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(steps));
  return g;
}

std::size_t FieldGrid::space_points() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(std::max(1, a.points));
  return n;
}

std::vector<double> FieldGrid::point(std::size_t space_index) const {
  std::vector<double> x(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto n = static_cast<std::size_t>(std::max(1, axes[i].points));
    x[i] = axes[i].at(static_cast<int>(space_index % n));
    space_index /= n;
  }
  return x;
}

double Field::sup() const {
  if (divergent) return kInf;
  double s = 0.0;
  for (double v : values) s = std::max(s, v);
  return s;
}

void Field::write_csv(std::ostream& out) const {
  out << "t";
  for (std::size_t i = 0; i < grid.axes.size(); ++i) out << ",x" << i + 1;
  out << ",value\n";
  const std::size_t sp = grid.space_points();
  for (std::size_t ti = 0; ti < grid.times.size(); ++ti) {
    for (std::size_t si = 0; si < sp; ++si) {
      out << csv::format(grid.times[ti]);
      for (double x : grid.point(si)) out << ',' << csv::format(x);
      out << ',' << csv::format(values[ti * sp + si]) << '\n';
    }
  }
}

double partition_rho(const VolterraProblem& pr, Partition& part) {
  part.rho_per_interval.clear();
  part.rho = 0.0;
  if (part.breakpoints.size() < 2) throw std::invalid_argument("partition needs at least two breakpoints");
  if (part.breakpoints.front() > pr.start || part.breakpoints.back() < pr.end)
    throw std::invalid_argument("partition does not cover the problem interval");
  std::map<std::pair<double, double>, WindowProfile> cache;
  for (std::size_t j = 0; j + 1 < part.breakpoints.size(); ++j) {
    const double a = part.breakpoints[j], b = part.breakpoints[j + 1];
    double r;
    if (pr.kernels.empty()) {
      r = 0.0;
    } else if (std::isinf(a) || std::isinf(b)) {
      r = total_mass_sum(pr);
    } else {
      const double len = b - a;
      const double range = pr.end - a;
      // profiles depend only on the length; the range only truncates them
      const double full = pr.end - pr.start;
      auto key = std::make_pair(len, std::isfinite(full) ? full : range);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, window_profile(pr, len, key.second)).first;
      r = 0.0;
      const auto& prof = it->second;
      for (std::size_t m = 0; m < prof.taus.size(); ++m)
        if (prof.taus[m] <= range * (1.0 + 1e-12)) r = std::max(r, prof.values[m]);
      r = std::max(r, window_sum(pr, std::min(len, range), 0.0));
    }
    part.rho_per_interval.push_back(r);
    part.rho = std::max(part.rho, r);
  }
  return part.rho;
}

PartitionSearch find_contraction_partition(const VolterraProblem& pr, std::size_t max_intervals) {
  PartitionSearch out;
  if (pr.kernels.empty()) {
    out.success = true;
    out.partition.breakpoints = {pr.start, pr.end};
    partition_rho(pr, out.partition);
    return out;
  }
  if (std::isinf(pr.start) || std::isinf(pr.end)) {
    // the unbounded piece sees the whole kernel mass whatever the partition
    out.irreducible_mass = total_mass_sum(pr);
    out.partition.breakpoints = {pr.start, pr.end};
    partition_rho(pr, out.partition);
    out.success = out.irreducible_mass < 1.0;
    if (!out.success)
      out.message = "irreducible kernel mass " + fmt_num(out.irreducible_mass) + " >= 1 on an unbounded interval";
    return out;
  }
  auto uniform = [&](std::size_t k) {
    Partition part;
    for (std::size_t i = 0; i <= k; ++i)
      part.breakpoints.push_back(i == k ? pr.end : pr.start + (pr.end - pr.start) * static_cast<double>(i) / k);
    partition_rho(pr, part);
    return part;
  };
  std::size_t k = 1;
  Partition part = uniform(k);
  while (!(part.rho < 1.0) && 2 * k <= max_intervals) {
    k *= 2;
    part = uniform(k);
  }
  if (!(part.rho < 1.0)) {
    out.irreducible_mass = part.rho;
    out.partition = part;
    out.message = "no uniform partition with up to " + std::to_string(max_intervals) +
                  " intervals contracts (rho = " + fmt_num(part.rho) + ")";
    return out;
  }
  // a few more halvings keep the binomial error bound tight
  while (part.rho > 0.5 && 2 * k <= std::min<std::size_t>(max_intervals, 64)) {
    Partition finer = uniform(2 * k);
    if (!(finer.rho < part.rho - 1e-3)) break;
    part = finer;
    k *= 2;
  }
  out.success = true;
  out.partition = part;
  return out;
}

PicardResult picard_solve(const VolterraProblem& pr, const FieldGrid& grid, const PicardOptions& opts) {
  pr.validate();
  if (grid.times.empty()) throw std::invalid_argument("grid has no time points");
  PicardResult res;
  // a fractional nonlinearity (gamma < 1) converges monotonically from f
  // without a contracting partition as long as the kernel masses are finite
  const bool fractional = pr.gamma < 1.0;
  if (opts.partition) {
    res.partition = *opts.partition;
    partition_rho(pr, res.partition);
  } else {
    auto search = find_contraction_partition(pr);
    if (!search.success && !fractional) throw NumericalFailure("non-contraction: " + search.message);
    res.partition = search.partition;
  }
  if (fractional) {
    if (!std::isfinite(total_mass_sum(pr)) && pr.whole_line())
      throw NumericalFailure("fractional Volterra equation with infinite kernel mass");
  } else if (!(res.partition.rho < 1.0)) {
    throw NumericalFailure("non-contraction: partition rho = " + fmt_num(res.partition.rho));
  }

  res.solution.grid = grid;
  const std::size_t sp = grid.space_points();
  if (pr.whole_line() && pr.force_unbounded_below) {
    res.solution.divergent = true;
    res.solution.values.assign(grid.size(), kInf);
    return res;
  }

  const double t_lo = *std::min_element(grid.times.begin(), grid.times.end());
  const double t_hi = *std::max_element(grid.times.begin(), grid.times.end());
  if (t_hi > pr.end * (1.0 + 1e-12) + 1e-12 || (!pr.whole_line() && t_lo < pr.start - 1e-12))
    throw std::invalid_argument("grid times lie outside the problem interval");

  // internal uniform mesh
  double h = 0.0;
  if (opts.step) {
    h = *opts.step;
  } else {
    std::vector<double> ts = grid.times;
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 1; i < ts.size(); ++i)
      if (ts[i] > ts[i - 1]) h = h == 0.0 ? ts[i] - ts[i - 1] : std::min(h, ts[i] - ts[i - 1]);
  }
  TimeMesh mesh;
  if (pr.whole_line()) {
    if (!(h > 0.0)) h = 1e-2;
    double L = 16.0 * h;
    auto tail = [&](double len) {
      double s = 0.0;
      for (const auto& k : pr.kernels) s += k.mass(kInf) - k.mass(len);
      return s;
    };
    while (tail(L) >= opts.tol / 10.0 && L < 1e6) L *= 2.0;
    L = std::max(L, t_hi - t_lo);
    const std::size_t cap = 20000;
    std::size_t n = static_cast<std::size_t>(std::ceil(L / h - 1e-9));
    if (n > cap) {
      n = cap;
      h = L / static_cast<double>(n);
    }
    mesh = {t_hi - static_cast<double>(n) * h, h, n};
    res.history_length = L;
  } else {
    const double len = t_hi - pr.start;
    if (!(h > 0.0)) h = len > 0.0 ? len / 1000.0 : 1.0;
    const std::size_t n = len > 0.0 ? static_cast<std::size_t>(std::max(1.0, std::round(len / h))) : 0;
    mesh = {pr.start, n > 0 ? len / static_cast<double>(n) : h, n};
  }

  const bool spatial = !pr.force_spatially_constant && pr.dimension > 0;
  std::vector<double> lattice{0.0};
  std::size_t pad = 0;
  if (spatial) {
    if (pr.dimension != 1 || grid.axes.size() != 1 || grid.axes[0].points < 2)
      throw std::invalid_argument("spatially varying forces are supported for d = 1 with a uniform axis");
    for (const auto& k : pr.kernels)
      if (!k.pure_power()) throw std::invalid_argument("spatial mode needs pure power kernels");
    const double dx = grid.axes[0].step();
    const double horizon = static_cast<double>(mesh.n) * mesh.h;
    pad = static_cast<std::size_t>(std::ceil(6.0 * std::sqrt(2.0 * horizon) / dx));
    pad = std::min<std::size_t>(pad, 400);
    lattice.clear();
    const std::size_t P = static_cast<std::size_t>(grid.axes[0].points) + 2 * pad;
    for (std::size_t j = 0; j < P; ++j)
      lattice.push_back(grid.axes[0].lo + (static_cast<double>(j) - static_cast<double>(pad)) * dx);
  }
  const std::size_t P = lattice.size();
  const std::size_t N = mesh.n;

  // force on the internal mesh
  std::vector<double> f((N + 1) * P);
  for (std::size_t i = 0; i <= N; ++i)
    for (std::size_t j = 0; j < P; ++j) {
      const double x = lattice[j];
      f[i * P + j] = pr.force(mesh.at(i), std::span<const double>(&x, spatial ? 1 : 0));
      if (!std::isfinite(f[i * P + j]) || f[i * P + j] < 0.0)
        throw std::invalid_argument("Volterra force must be finite and nonnegative");
    }

  // weights
  std::vector<KernelWeights> tw;
  std::vector<std::vector<double>> sa, sb;  // spatial mode: [lag * (2P-1) + offset]
  for (const auto& k : pr.kernels) tw.push_back(time_weights(k, mesh, pr.whole_line()));
  const std::size_t O = 2 * P - 1;
  if (spatial) {
    const double dx = grid.axes[0].step();
    for (const auto& k : pr.kernels) {
      std::vector<double> A(N * O, 0.0), B(N * O, 0.0);
      for (std::size_t lag = 0; lag < N; ++lag) {
        const double lo_t = static_cast<double>(lag) * mesh.h;
        for (std::size_t o = 0; o < O; ++o) {
          const double off = (static_cast<double>(o) - static_cast<double>(P - 1)) * dx;
          const double lo = off - 0.5 * dx, hi = off + 0.5 * dx;
          auto G = [&](double tau) {
            return k.box_mass(tau, std::span<const double>(&lo, 1), std::span<const double>(&hi, 1));
          };
          auto Gb = [&](double tau) { return (tau - lo_t) / mesh.h * G(tau); };
          double tot, bb;
          if (lag == 0) {
            tot = quad::endpoint(G, 0.0, mesh.h, 1e-9).value;
            bb = quad::endpoint(Gb, 0.0, mesh.h, 1e-9).value;
          } else {
            tot = quad::gauss20(G, lo_t, lo_t + mesh.h);
            bb = quad::gauss20(Gb, lo_t, lo_t + mesh.h);
          }
          A[lag * O + o] = tot - bb;
          B[lag * O + o] = bb;
        }
      }
      sa.push_back(std::move(A));
      sb.push_back(std::move(B));
    }
  }

  const double pg = pr.p * pr.gamma;
  std::vector<double> v = f, next(v.size()), u(v.size());
  double d1 = 0.0;
  int growth = 0;
  double prev = kInf;
  const std::size_t k_int = std::max<std::size_t>(1, res.partition.intervals());
  const double rho = res.partition.rho;
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t n = 0; n < v.size(); ++n) u[n] = std::pow(v[n], pg);
    parallel_for(N + 1, [&](std::size_t i) {
      for (std::size_t j = 0; j < P; ++j) {
        double total = f[i * P + j];
        for (std::size_t l = 0; l < pr.kernels.size(); ++l) {
          double s = tw[l].tail[i] * u[j];
          if (!spatial) {
            const auto& A = tw[l].a;
            const auto& B = tw[l].b;
            for (std::size_t k = 0; k < i; ++k) s += A[k] * u[(i - k) * P + j] + B[k] * u[(i - k - 1) * P + j];
          } else {
            const auto& A = sa[l];
            const auto& B = sb[l];
            for (std::size_t k = 0; k < i; ++k) {
              const double* ua = &u[(i - k) * P];
              const double* ub = &u[(i - k - 1) * P];
              for (std::size_t jj = 0; jj < P; ++jj) {
                const std::size_t o = j + (P - 1) - jj;
                s += A[k * O + o] * ua[jj] + B[k * O + o] * ub[jj];
              }
            }
          }
          total += std::pow(std::max(s, 0.0), 1.0 / pr.p);
        }
        next[i * P + j] = total;
      }
    });
    double diff = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (!std::isfinite(next[n])) throw NumericalFailure("Picard iterate became non-finite");
      diff = std::max(diff, std::abs(next[n] - v[n]));
    }
    v.swap(next);
    if (it == 1) d1 = diff;
    const double bound = fractional ? kInf : binom_term(rho, k_int, it - 1) * d1;
    res.trace.push_back({it, diff, bound});
    res.iterations = it;
    growth = diff > prev ? growth + 1 : 0;
    prev = diff;
    if (growth >= 5 && diff > bound * (1.0 + 1e-9)) {
      std::vector<double> r;
      for (const auto& e : res.trace) r.push_back(e.sup_difference);
      throw NumericalFailure("Picard residual grew for 5 consecutive iterations", r);
    }
    const double tail = fractional ? 0.0 : binom_tail(rho, k_int, it) * d1;
    if (diff < opts.tol && tail < opts.tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) {
    std::vector<double> r;
    for (const auto& e : res.trace) r.push_back(e.sup_difference);
    throw NumericalFailure("Picard iteration did not converge in " + std::to_string(opts.max_iter) +
                               " iterations (last residual " + fmt_num(r.empty() ? 0.0 : r.back()) + ")",
                           r);
  }

  // map back to the requested grid
  res.solution.values.assign(grid.size(), 0.0);
  for (std::size_t si = 0; si < sp; ++si) {
    std::size_t j = 0;
    if (spatial) j = si + pad;
    std::vector<double> col(N + 1);
    for (std::size_t i = 0; i <= N; ++i) col[i] = v[i * P + j];
    const auto vals = interpolate(mesh, col, grid.times);
    for (std::size_t ti = 0; ti < grid.times.size(); ++ti) res.solution.values[ti * sp + si] = vals[ti];
  }
  return res;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "iteration,sup_difference,bound\n";
  for (const auto& e : trace)
    out << e.iteration << ',' << csv::format(e.sup_difference) << ',' << csv::format(e.bound) << '\n';
}

Comparison compare_fields(const Field& candidate, const Field& bound, double slack) {
  if (candidate.values.size() != bound.values.size()) throw std::invalid_argument("fields live on different grids");
  Comparison c;
  for (std::size_t i = 0; i < candidate.values.size(); ++i)
    c.max_violation = std::max(c.max_violation, candidate.values[i] - bound.values[i] - slack);
  c.pass = c.max_violation <= 0.0;
  return c;
}

Comparison comparison_bound(const VolterraProblem& problem, const Field& candidate, const PicardOptions& opts) {
  const auto sol = picard_solve(problem, candidate.grid, opts);
  // allow for the solver tolerance
  return compare_fields(candidate, sol.solution, 10.0 * opts.tol);
}

double stability_fixed_point(double F, double theta, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("stability_fixed_point needs gamma in (0, 1)");
  if (!(F >= 0.0) || !(theta >= 0.0)) throw std::invalid_argument("F and theta must be >= 0");
  if (theta == 0.0) return F;
  if (F == 0.0) return std::pow(theta, 1.0 / (1.0 - gamma));
  auto h = [&](double a) { return a - F - theta * std::pow(a, gamma); };
  double lo = F;
  double hi = std::max(2.0 * F, std::pow(2.0 * theta, 1.0 / (1.0 - gamma)));
  while (h(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 400 && hi - lo > 1e-16 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string ExpKernelFamily::describe() const {
  auto exp_term = [](double e) {
    if (e == 1.0) return std::string("e^{t}");
    if (e == -1.0) return std::string("e^{-t}");
    return "e^{" + fmt_num(e) + "t}";
  };
  switch (kind) {
    case Kind::none:
      return "no solution";
    case Kind::linear:
      return "t + c";
    case Kind::exponential:
      if (alpha) return fmt_num(constant) + "*" + exp_term(*alpha) + " + c*" + exp_term(free_exponent);
      return "c*" + exp_term(free_exponent) + " + " + fmt_num(constant);
  }
  return "";
}

double ExpKernelFamily::evaluate(double t, double c) const {
  switch (kind) {
    case Kind::none:
      return std::numeric_limits<double>::quiet_NaN();
    case Kind::linear:
      return t + c;
    case Kind::exponential:
      return (alpha ? constant * std::exp(*alpha * t) : constant) + c * std::exp(free_exponent * t);
  }
  return 0.0;
}

ExpKernelFamily exp_kernel_family(double lambda, std::optional<double> alpha) {
  ExpKernelFamily fam;
  fam.lambda = lambda;
  fam.alpha = alpha;
  if (alpha) {
    if (!(lambda > 0.0 && *alpha + lambda > 1.0))
      throw std::invalid_argument("weighted family requires lambda > 0 and alpha + lambda > 1");
    fam.kind = ExpKernelFamily::Kind::exponential;
    fam.constant = (*alpha + lambda) / (*alpha + lambda - 1.0);
    fam.free_exponent = 1.0 - lambda;
    fam.bounded_unique = true;
    return fam;
  }
  if (lambda <= 0.0) return fam;
  if (lambda == 1.0) {
    fam.kind = ExpKernelFamily::Kind::linear;
    fam.free_exponent = 0.0;
    return fam;
  }
  fam.kind = ExpKernelFamily::Kind::exponential;
  fam.constant = lambda / (lambda - 1.0);
  fam.free_exponent = 1.0 - lambda;
  fam.bounded_unique = lambda > 1.0;
  return fam;
}

}  // namespace lvx::volterra
