#include "lvx/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lvx/csv.hpp"
#include "lvx/errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "sim_internal.hpp"

namespace lvx::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t cell_key(std::int64_t i, const std::vector<std::int64_t>& js) {
  std::uint64_t h = splitmix(static_cast<std::uint64_t>(i));
  for (std::size_t k = 0; k < js.size(); ++k)
    h = splitmix(h ^ (static_cast<std::uint64_t>(js[k]) + 0x5851f42d4c957f2dULL * (k + 1)));
  return h;
}

std::int64_t snap_index(double x, double step, bool up) {
  const double r = x / step;
  const double n = std::round(r);
  if (std::abs(r - n) < 1e-9) return static_cast<std::int64_t>(n);
  return static_cast<std::int64_t>(up ? std::ceil(r) : std::floor(r));
}

}  // namespace

void SimConfig::validate() const {
  if (level < 1) throw std::invalid_argument("grid level N must be >= 1");
  if (side && !(*side > 0.0)) throw std::invalid_argument("cell side must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("Picard tolerance must be > 0");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (replicates < 1) throw std::invalid_argument("replicate count must be >= 1");
  if (moment_p && !(*moment_p > 0.0)) throw std::invalid_argument("moment exponent must be > 0");
  if (!(reach > 0.0)) throw std::invalid_argument("reach must be > 0");
  if (history && !(*history > 0.0)) throw std::invalid_argument("history must be > 0");
  if (jackknife_groups < 2) throw std::invalid_argument("jackknife needs at least 2 groups");
}

std::size_t SpaceTimeGrid::space_count() const {
  std::size_t n = 1;
  for (auto c : space_cells) n *= c;
  return n;
}

double SpaceTimeGrid::time(std::size_t i) const {
  return static_cast<double>(t_first + static_cast<std::int64_t>(i)) * lattice.dt;
}

std::vector<double> SpaceTimeGrid::times() const {
  std::vector<double> t;
  for (std::size_t i = 0; i <= steps; ++i) t.push_back(time(i));
  return t;
}

std::vector<std::int64_t> SpaceTimeGrid::space_index(std::size_t j) const {
  std::vector<std::int64_t> out(space_first.size());
  for (std::size_t k = 0; k < space_first.size(); ++k) {
    out[k] = space_first[k] + static_cast<std::int64_t>(j % space_cells[k]);
    j /= space_cells[k];
  }
  return out;
}

std::vector<double> SpaceTimeGrid::corner(std::size_t j) const {
  const auto idx = space_index(j);
  std::vector<double> x(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) x[k] = static_cast<double>(idx[k]) * lattice.side;
  return x;
}

levy::Cell SpaceTimeGrid::cell(std::size_t i, std::size_t j) const {
  levy::Cell c;
  c.t_lo = time(i);
  c.t_hi = time(i + 1);
  c.lower = corner(j);
  c.upper = c.lower;
  for (double& u : c.upper) u += lattice.side;
  return c;
}

double SpaceTimeGrid::mesh() const { return dimension() == 0 ? lattice.dt : std::max(lattice.dt, lattice.side); }

std::pair<std::size_t, std::size_t> SpaceTimeGrid::locate(double t, const std::vector<double>& x) const {
  if (x.size() != space_first.size()) throw std::invalid_argument("node dimension does not match the grid");
  const auto ti = static_cast<std::int64_t>(std::llround(t / lattice.dt)) - t_first;
  if (ti < 0 || ti > static_cast<std::int64_t>(steps)) throw std::invalid_argument("node time outside the grid");
  std::size_t j = 0, mult = 1;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto jk = static_cast<std::int64_t>(std::llround(x[k] / lattice.side)) - space_first[k];
    if (jk < 0 || jk >= static_cast<std::int64_t>(space_cells[k]))
      throw std::invalid_argument("node position outside the grid");
    j += static_cast<std::size_t>(jk) * mult;
    mult *= space_cells[k];
  }
  return {static_cast<std::size_t>(ti), j};
}

SpaceTimeGrid build_grid(double T, const std::vector<double>& box_lo, const std::vector<double>& box_hi, int N,
                         double t0, std::optional<double> side) {
  if (N < 1) throw std::invalid_argument("grid level N must be >= 1");
  if (box_lo.size() != box_hi.size()) throw std::invalid_argument("box corners differ in dimension");
  for (std::size_t k = 0; k < box_lo.size(); ++k)
    if (!(box_hi[k] > box_lo[k])) throw std::invalid_argument("spatial box is empty");
  if (!std::isfinite(T)) throw std::invalid_argument("grid end time must be finite");
  SpaceTimeGrid g;
  g.lattice.level = N;
  g.lattice.dt = 1.0 / N;
  g.lattice.side = side.value_or(1.0 / N);
  const std::int64_t kT = snap_index(T, g.lattice.dt, true);
  const double lo = std::max(static_cast<double>(kT) * g.lattice.dt - N, t0);
  std::int64_t k0 = snap_index(lo, g.lattice.dt, true);
  if (k0 > kT) k0 = kT;
  g.t_first = k0;
  g.steps = static_cast<std::size_t>(kT - k0);
  for (std::size_t k = 0; k < box_lo.size(); ++k) {
    const std::int64_t a = snap_index(box_lo[k], g.lattice.side, false);
    const std::int64_t b = snap_index(box_hi[k], g.lattice.side, true);
    g.space_first.push_back(a);
    g.space_cells.push_back(static_cast<std::size_t>(std::max<std::int64_t>(1, b - a)));
  }
  return g;
}

double lattice_noise(const levy::LevyCharacteristics& chars, const Lattice& lat, std::int64_t i,
                     const std::vector<std::int64_t>& js, std::uint64_t seed, std::uint64_t replicate) {
  levy::Cell c;
  c.t_lo = static_cast<double>(i) * lat.dt;
  c.t_hi = static_cast<double>(i + 1) * lat.dt;
  for (auto j : js) {
    c.lower.push_back(static_cast<double>(j) * lat.side);
    c.upper.push_back(static_cast<double>(j + 1) * lat.side);
  }
  CellStream stream(seed, replicate, cell_key(i, js));
  return levy::sample_cell(chars, c, stream).value;
}

NoiseField simulate_noise(const levy::LevyCharacteristics& chars, const SpaceTimeGrid& grid, std::uint64_t seed,
                          std::uint64_t replicate) {
  NoiseField nf;
  nf.grid = grid;
  const std::size_t M = grid.space_count();
  nf.values.assign(grid.time_cells() * M, 0.0);
  std::vector<std::vector<std::int64_t>> js(M);
  for (std::size_t j = 0; j < M; ++j) js[j] = grid.space_index(j);
  for (std::size_t i = 0; i < grid.time_cells(); ++i) {
    const std::int64_t gi = grid.t_first + static_cast<std::int64_t>(i);
    for (std::size_t j = 0; j < M; ++j) nf.values[i * M + j] = lattice_noise(chars, grid.lattice, gi, js[j], seed, replicate);
  }
  return nf;
}

KernelTable::KernelTable(const kernels::Kernel& k, const Lattice& lat, std::size_t max_lag,
                         const std::vector<std::size_t>& reach_cells, Corner corner)
    : max_lag_(max_lag), reach_(reach_cells) {
  if (static_cast<int>(reach_.size()) != k.dimension()) throw std::invalid_argument("kernel dimension mismatch");
  for (auto r : reach_) stride_ *= 2 * r + 1;
  w_.assign(max_lag_ * stride_, 0.0);
  const std::size_t d = reach_.size();
  parallel_for(stride_, [&](std::size_t f) {
    std::vector<double> o(d);
    std::size_t rem = f;
    for (std::size_t a = 0; a < d; ++a) {
      const std::size_t n = 2 * reach_[a] + 1;
      o[a] = static_cast<double>(static_cast<std::int64_t>(rem % n) - static_cast<std::int64_t>(reach_[a]));
      rem /= n;
    }
    if (max_lag_ >= 1) {
      // last time cell: average over (0, dt) x source cell
      std::vector<double> lo(d), hi(d);
      for (std::size_t a = 0; a < d; ++a) {
        lo[a] = (o[a] - 1.0) * lat.side;
        hi[a] = o[a] * lat.side;
      }
      auto f_avg = [&](double tau) {
        if (d == 0) return k(tau, {});
        return k.box_average_power(tau, lo, hi, 1.0);
      };
      w_[f] = quad::endpoint(f_avg, 0.0, lat.dt, 1e-10).value / lat.dt;
    }
    std::vector<double> x(d);
    for (std::size_t lag = 2; lag <= max_lag_; ++lag) {
      const double shift = corner == Corner::lower_left ? 0.0 : 1.0;
      for (std::size_t a = 0; a < d; ++a) x[a] = (o[a] - shift) * lat.side;
      const double t = (static_cast<double>(lag) - shift) * lat.dt;
      w_[(lag - 1) * stride_ + f] = k(t, x);
    }
  });
}

std::size_t KernelTable::flat(const std::vector<std::int64_t>& offset) const {
  std::size_t f = 0, mult = 1;
  for (std::size_t a = 0; a < reach_.size(); ++a) {
    const auto r = static_cast<std::int64_t>(reach_[a]);
    if (offset[a] < -r || offset[a] > r) return static_cast<std::size_t>(-1);
    f += static_cast<std::size_t>(offset[a] + r) * mult;
    mult *= 2 * reach_[a] + 1;
  }
  return f;
}

double KernelTable::operator()(std::size_t lag, const std::vector<std::int64_t>& offset) const {
  if (lag < 1 || lag > max_lag_) return 0.0;
  const std::size_t f = flat(offset);
  return f == static_cast<std::size_t>(-1) ? 0.0 : at(lag, f);
}

namespace detail {

std::vector<std::size_t> grid_reach(const SpaceTimeGrid& g) {
  std::vector<std::size_t> r;
  for (auto c : g.space_cells) r.push_back(c - 1);
  return r;
}

// flat table offset for every (node cell, source cell) pair
std::vector<std::size_t> offset_map(const SpaceTimeGrid& g, const KernelTable& table) {
  const std::size_t M = g.space_count();
  std::vector<std::size_t> map(M * M);
  std::vector<std::vector<std::int64_t>> idx(M);
  for (std::size_t j = 0; j < M; ++j) idx[j] = g.space_index(j);
  std::vector<std::int64_t> o(g.dimension());
  for (std::size_t j = 0; j < M; ++j)
    for (std::size_t jj = 0; jj < M; ++jj) {
      for (std::size_t a = 0; a < o.size(); ++a) o[a] = idx[j][a] - idx[jj][a];
      map[j * M + jj] = table.flat(o);
    }
  return map;
}

double initial_at(const ModelSpec& m, double t, const std::vector<double>& x) {
  return m.initial(t, x, m.kernel, m.interval.start);
}

// sigma constant: each node is Y0 + sigma0 sum W Lambda, no solve needed
std::vector<double> additive_values(const ModelSpec& m, const SpaceTimeGrid& g, const KernelTable& table,
                                    const NoiseField& noise, const std::vector<std::pair<std::size_t, std::size_t>>& where) {
  const std::size_t M = g.space_count();
  const std::size_t d = static_cast<std::size_t>(g.dimension());
  std::vector<std::vector<std::int64_t>> idx(M);
  for (std::size_t j = 0; j < M; ++j) idx[j] = g.space_index(j);
  const double s0 = m.sigma.at_zero();
  std::vector<double> out(where.size());
  std::vector<std::int64_t> o(d);
  for (std::size_t n = 0; n < where.size(); ++n) {
    const auto [i, j] = where[n];
    double acc = 0.0;
    if (s0 != 0.0) {
      for (std::size_t jj = 0; jj < M; ++jj) {
        for (std::size_t a = 0; a < d; ++a) o[a] = idx[j][a] - idx[jj][a];
        const std::size_t f = table.flat(o);
        if (f == static_cast<std::size_t>(-1)) continue;
        for (std::size_t lag = 1; lag <= i; ++lag) {
          const double lam = noise.at(i - lag, jj);
          if (lam != 0.0) acc += table.at(lag, f) * lam;
        }
      }
    }
    out[n] = initial_at(m, g.time(i), g.corner(j)) + s0 * acc;
  }
  return out;
}

}  // namespace detail

PathField solve_path(const ModelSpec& model, const SpaceTimeGrid& grid, const NoiseField& noise,
                     const SimConfig& cfg, double force_shift) {
  cfg.validate();
  if (grid.dimension() != model.dimension()) throw std::invalid_argument("grid and kernel dimensions differ");
  if (noise.values.size() != grid.time_cells() * grid.space_count())
    throw std::invalid_argument("noise field does not match the grid");
  const KernelTable table(model.kernel, grid.lattice, grid.steps, detail::grid_reach(grid), cfg.corner);
  return detail::solve_with_table(model, grid, noise, cfg, table, detail::offset_map(grid, table), force_shift);
}

namespace detail {

PathField solve_with_table(const ModelSpec& model, const SpaceTimeGrid& grid, const NoiseField& noise,
                           const SimConfig& cfg, const KernelTable& table, const std::vector<std::size_t>& offsets,
                           double force_shift) {
  const std::size_t K = grid.steps, M = grid.space_count();
  PathField out;
  out.grid = grid;
  std::vector<double> y0((K + 1) * M);
  for (std::size_t i = 0; i <= K; ++i)
    for (std::size_t j = 0; j < M; ++j) y0[i * M + j] = initial_at(model, grid.time(i), grid.corner(j)) + force_shift;

  const auto& sigma = model.sigma;
  // new value of node (i, j) from sources s[i' * M + j'] = sigma(Y) Lambda
  auto node_sum = [&](std::size_t i, std::size_t j, const std::vector<double>& s) {
    double acc = 0.0;
    for (std::size_t lag = 1; lag <= i; ++lag) {
      const double* src = &s[(i - lag) * M];
      const std::size_t* om = &offsets[j * M];
      for (std::size_t jj = 0; jj < M; ++jj) {
        if (src[jj] == 0.0) continue;
        acc += table.at(lag, om[jj]) * src[jj];
      }
    }
    return acc;
  };

  std::vector<double> s(K * M, 0.0);
  if (cfg.mode == SolveMode::forward) {
    // the discrete system is strictly causal, so one forward sweep solves it
    out.values = y0;
    for (std::size_t i = 0; i <= K; ++i) {
      if (i > 0) {
        parallel_for(M, [&](std::size_t j) { out.values[i * M + j] += node_sum(i, j, s); });
      }
      if (i < K)
        for (std::size_t j = 0; j < M; ++j) s[i * M + j] = sigma(out.values[i * M + j]) * noise.at(i, j);
    }
    for (double v : out.values)
      if (!std::isfinite(v)) throw NumericalFailure("simulated path became non-finite");
    return out;
  }

  // Jacobi Picard iteration over all nodes
  std::vector<double> y = y0, next(y.size());
  double prev = kInf;
  int growth = 0;
  std::vector<double> residuals;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < M; ++j) s[i * M + j] = sigma(y[i * M + j]) * noise.at(i, j);
    parallel_for((K + 1) * M, [&](std::size_t n) {
      const std::size_t i = n / M, j = n % M;
      next[n] = y0[n] + node_sum(i, j, s);
    });
    double diff = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
      if (!std::isfinite(next[n])) {
        residuals.push_back(kInf);
        throw NumericalFailure("Picard iterate became non-finite", residuals);
      }
      diff = std::max(diff, std::abs(next[n] - y[n]));
    }
    y.swap(next);
    residuals.push_back(diff);
    out.trace.push_back({it, diff, 0.0});
    growth = diff > prev ? growth + 1 : 0;
    prev = diff;
    if (growth >= 5) throw NumericalFailure("Picard residual grew for 5 consecutive iterations", residuals);
    if (diff < cfg.tol) {
      out.values = std::move(y);
      return out;
    }
  }
  throw NumericalFailure("Picard iteration did not converge in " + std::to_string(cfg.max_iter) + " iterations",
                         residuals);
}

}  // namespace detail

double discrete_contraction(const ModelSpec& model, const SpaceTimeGrid& grid, const NoiseField& noise,
                            const SimConfig& cfg) {
  const auto lip = model.sigma.lipschitz_constant();
  if (!lip) return kInf;
  const KernelTable table(model.kernel, grid.lattice, grid.steps, detail::grid_reach(grid), cfg.corner);
  const auto offsets = detail::offset_map(grid, table);
  const std::size_t K = grid.steps, M = grid.space_count();
  double rho = 0.0;
  for (std::size_t i = 1; i <= K; ++i)
    for (std::size_t j = 0; j < M; ++j) {
      double acc = 0.0;
      for (std::size_t lag = 1; lag <= i; ++lag)
        for (std::size_t jj = 0; jj < M; ++jj)
          acc += std::abs(table.at(lag, offsets[j * M + jj]) * noise.at(i - lag, jj));
      rho = std::max(rho, *lip * acc);
    }
  return rho;
}

void PathEnsemble::write_csv(std::ostream& out, const std::vector<double>* bound) const {
  const std::size_t d = nodes.empty() ? 0 : nodes.front().x.size();
  out << "t";
  for (std::size_t k = 0; k < d; ++k) out << ",x" << k + 1;
  out << ",moment,se,mean,mean_se";
  if (bound) out << ",bound";
  out << '\n';
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    out << csv::format(nodes[n].t);
    for (double x : nodes[n].x) out << ',' << csv::format(x);
    if (estimable)
      out << ',' << csv::format(moment[n]) << ',' << csv::format(se[n]);
    else
      out << ",not estimable,";
    out << ',' << csv::format(mean[n]) << ',' << csv::format(mean_se[n]);
    if (bound) out << ',' << csv::format((*bound)[n]);
    out << '\n';
  }
}

PathEnsemble estimate_moments(const ModelSpec& model, const SpaceTimeGrid& grid, const SimConfig& cfg,
                              const std::vector<Node>& probes, std::size_t keep_paths) {
  cfg.validate();
  model.validate();
  PathEnsemble ens;
  ens.replicates = cfg.replicates;
  ens.seed = cfg.seed;
  ens.p = cfg.moment_p.value_or(model.p);
  ens.eta = model.eta;
  const double p = ens.p;
  const auto& jumps = model.chars.jumps;
  if (const auto* st = std::get_if<levy::AlphaStable>(&jumps.family())) {
    // Y has a stable tail unless sigma vanishes identically
    const bool trivial = model.sigma.is_constant() && model.sigma.at_zero() == 0.0;
    if (p >= st->index && model.chars.modulation.sup() > 0.0 && !trivial) {
      ens.estimable = false;
      ens.note = "not estimable: moment order p >= stable index";
    }
  }

  // nodes
  const std::size_t M = grid.space_count();
  std::vector<std::pair<std::size_t, std::size_t>> where;
  if (probes.empty()) {
    for (std::size_t i = 0; i <= grid.steps; ++i)
      for (std::size_t j = 0; j < M; ++j) where.emplace_back(i, j);
  } else {
    for (const auto& n : probes) where.push_back(grid.locate(n.t, n.x));
  }
  for (const auto& [i, j] : where) ens.nodes.push_back({grid.time(i), grid.corner(j)});
  const std::size_t nn = where.size();

  const KernelTable table(model.kernel, grid.lattice, grid.steps, detail::grid_reach(grid), cfg.corner);
  const bool additive = model.sigma.is_constant();
  std::vector<std::size_t> offsets;
  if (!additive || keep_paths > 0) offsets = detail::offset_map(grid, table);

  // one replicate: values at the requested nodes
  auto run = [&](std::size_t r, std::vector<double>& vals, PathField* keep) {
    const NoiseField noise = simulate_noise(model.chars, grid, cfg.seed, r);
    if (additive && !keep) {
      vals = detail::additive_values(model, grid, table, noise, where);
      return;
    }
    PathField path = detail::solve_with_table(model, grid, noise, cfg, table, offsets, 0.0);
    for (std::size_t n = 0; n < nn; ++n) vals[n] = path.at(where[n].first, where[n].second);
    if (keep) *keep = std::move(path);
  };

  const std::size_t R = cfg.replicates;
  const std::size_t G = std::min(cfg.jackknife_groups, R);
  std::vector<detail::Welford> wm(nn), wy(nn);
  std::vector<std::vector<double>> group_sum(G, std::vector<double>(nn, 0.0));
  std::vector<std::size_t> group_n(G, 0);
  const std::size_t block = 256;
  std::vector<std::vector<double>> buf(block, std::vector<double>(nn));
  for (std::size_t r0 = 0; r0 < R; r0 += block) {
    const std::size_t nb = std::min(block, R - r0);
    std::vector<PathField> kept(nb);
    parallel_for(nb, [&](std::size_t b) {
      const std::size_t r = r0 + b;
      run(r, buf[b], r < keep_paths ? &kept[b] : nullptr);
    });
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t r = r0 + b;
      const std::size_t g = r * G / R;
      ++group_n[g];
      for (std::size_t n = 0; n < nn; ++n) {
        const double y = buf[b][n];
        const double m = std::pow(std::abs(y), p);
        wm[n].add(m);
        wy[n].add(y);
        group_sum[g][n] += m;
      }
      if (r < keep_paths) ens.paths.push_back(std::move(kept[b]));
    }
  }
  for (std::size_t n = 0; n < nn; ++n) {
    ens.moment.push_back(wm[n].mean);
    ens.se.push_back(wm[n].se());
    ens.mean.push_back(wy[n].mean);
    ens.mean_se.push_back(wy[n].se());
  }
  if (!ens.estimable) {
    std::fill(ens.moment.begin(), ens.moment.end(), std::numeric_limits<double>::quiet_NaN());
    std::fill(ens.se.begin(), ens.se.end(), std::numeric_limits<double>::quiet_NaN());
  }

  // weighted sup statistic and its grouped jackknife error
  const double outer = std::max(p, 1.0);
  auto sup_of = [&](auto&& moment_at) {
    double s = 0.0;
    for (std::size_t n = 0; n < nn; ++n)
      s = std::max(s, std::pow(moment_at(n) / std::exp(model.eta * ens.nodes[n].t), 1.0 / outer));
    return s;
  };
  ens.sup_statistic = sup_of([&](std::size_t n) { return ens.moment[n]; });
  if (G >= 2 && ens.estimable) {
    std::vector<double> total(nn, 0.0);
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t n = 0; n < nn; ++n) total[n] += group_sum[g][n];
    std::vector<double> loo(G);
    for (std::size_t g = 0; g < G; ++g) {
      const double cnt = static_cast<double>(R - group_n[g]);
      loo[g] = sup_of([&](std::size_t n) { return (total[n] - group_sum[g][n]) / cnt; });
    }
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= static_cast<double>(G);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    ens.sup_se = std::sqrt(ss * (static_cast<double>(G) - 1.0) / static_cast<double>(G));
  }
  return ens;
}

std::vector<double> moment_bound_at(const ModelSpec& model, const std::vector<Node>& nodes,
                                    const volterra::MomentBoundOptions& opts) {
  std::vector<double> times;
  for (const auto& n : nodes) times.push_back(n.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  volterra::FieldGrid g;
  g.times = times;
  auto o = opts;
  if (!o.picard.step) o.picard.step = 1e-2;
  const volterra::Field f = volterra::moment_bound(model, g, o);
  const double outer = std::max(model.p, 1.0);
  std::vector<double> out;
  for (const auto& n : nodes) {
    const auto it = std::lower_bound(times.begin(), times.end(), n.t);
    const double v = f.at(static_cast<std::size_t>(it - times.begin()));
    out.push_back(std::isfinite(v) ? std::pow(v, outer) * model.weight(n.t) : kInf);
  }
  return out;
}

}  // namespace lvx::sim
