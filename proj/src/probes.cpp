#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lvx/csv.hpp"
#include "lvx/simulator.hpp"
#include "parallel.hpp"
#include "sim_internal.hpp"

namespace lvx::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double snap(double v, double step) { return std::round(v / step) * step; }

// window [t - H, t] x [x - reach, x + reach] on the lattice of level N
SpaceTimeGrid window(const ModelSpec& m, const SimConfig& cfg, double t, const std::vector<double>& lo,
                     const std::vector<double>& hi) {
  const double H = cfg.history.value_or(static_cast<double>(cfg.level));
  const double t0 = std::max(m.interval.start, t - H);
  return build_grid(t, lo, hi, cfg.level, t0, cfg.side);
}

using Where = std::vector<std::pair<std::size_t, std::size_t>>;

// values[r][n] at the given nodes of one grid, replicate by replicate
std::vector<std::vector<double>> sample(const ModelSpec& m, const SpaceTimeGrid& g, const SimConfig& cfg,
                                        const Where& where) {
  const KernelTable table(m.kernel, g.lattice, g.steps, detail::grid_reach(g), cfg.corner);
  const bool additive = m.sigma.is_constant();
  std::vector<std::size_t> offsets;
  if (!additive) offsets = detail::offset_map(g, table);
  std::vector<std::vector<double>> out(cfg.replicates);
  parallel_for(cfg.replicates, [&](std::size_t r) {
    const NoiseField noise = simulate_noise(m.chars, g, cfg.seed, r);
    if (additive) {
      out[r] = detail::additive_values(m, g, table, noise, where);
      return;
    }
    const PathField path = detail::solve_with_table(m, g, noise, cfg, table, offsets, 0.0);
    out[r].resize(where.size());
    for (std::size_t n = 0; n < where.size(); ++n) out[r][n] = path.at(where[n].first, where[n].second);
  });
  return out;
}

struct NodeSample {
  std::vector<double> y;         // Y at the node
  std::vector<double> neighbor;  // Y at the neighbor used for the autocovariance
};

NodeSample sample_node(const ModelSpec& m, const SimConfig& cfg, double t, const std::vector<double>& x) {
  const std::size_t d = x.size();
  const double side = cfg.side.value_or(1.0 / cfg.level);
  std::vector<double> lo(d), hi(d);
  for (std::size_t a = 0; a < d; ++a) {
    lo[a] = x[a] - cfg.reach;
    hi[a] = x[a] + cfg.reach + side;
  }
  const SpaceTimeGrid g = window(m, cfg, t, lo, hi);
  Where where{g.locate(t, x)};
  if (d > 0) {
    auto xn = x;
    xn[0] += side;
    where.push_back(g.locate(t, xn));
  } else {
    if (where[0].first == 0) throw std::invalid_argument("stationarity window has no earlier time node");
    where.push_back({where[0].first - 1, where[0].second});
  }
  const auto v = sample(m, g, cfg, where);
  NodeSample s;
  for (const auto& row : v) {
    s.y.push_back(row[0]);
    s.neighbor.push_back(row[1]);
  }
  return s;
}

double mean_of(const std::vector<double>& v) {
  detail::Welford w;
  for (double x : v) w.add(x);
  return w.mean;
}

// z statistic of the paired differences; 0/0 counts as agreement
double paired_z(const std::vector<double>& a, const std::vector<double>& b) {
  detail::Welford w;
  for (std::size_t r = 0; r < a.size(); ++r) w.add(a[r] - b[r]);
  const double se = w.se();
  if (se == 0.0) return w.mean == 0.0 ? 0.0 : kInf;
  return w.mean / se;
}

}  // namespace

StationarityReport stationarity_probe(const ModelSpec& model, const Node& base, const std::vector<Shift>& shifts,
                                      const SimConfig& cfg) {
  cfg.validate();
  model.validate();
  if (static_cast<int>(base.x.size()) != model.dimension())
    throw std::invalid_argument("probe node dimension does not match the kernel");
  const auto mk = model.chars.modulation.kind;
  if ((mk == levy::ModulationKind::compact || mk == levy::ModulationKind::power) && !model.chars.jumps.empty())
    throw std::invalid_argument("stationarity probe needs a spatially homogeneous jump intensity");
  const double dt = 1.0 / cfg.level;
  const double side = cfg.side.value_or(dt);
  Node b0{snap(base.t, dt), base.x};
  for (auto& v : b0.x) v = snap(v, side);
  const NodeSample sb = sample_node(model, cfg, b0.t, b0.x);

  StationarityReport rep;
  rep.shifts = shifts;
  for (std::size_t k = 0; k < shifts.size(); ++k) {
    if (shifts[k].xi.size() != b0.x.size()) throw std::invalid_argument("shift dimension does not match the node");
    auto x = b0.x;
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = snap(x[a] + shifts[k].xi[a], side);
    const NodeSample ss = sample_node(model, cfg, snap(b0.t + shifts[k].h, dt), x);

    auto add = [&](const std::string& stat, const std::vector<double>& a, const std::vector<double>& b, double va,
                   double vb) {
      const double z = paired_z(a, b);
      rep.items.push_back({k, stat, va, vb, z});
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
    };
    add("mean", sb.y, ss.y, mean_of(sb.y), mean_of(ss.y));
    std::vector<double> qb, qs, cb, cs;
    for (std::size_t r = 0; r < sb.y.size(); ++r) {
      qb.push_back(sb.y[r] * sb.y[r]);
      qs.push_back(ss.y[r] * ss.y[r]);
      cb.push_back(sb.y[r] * sb.neighbor[r]);
      cs.push_back(ss.y[r] * ss.neighbor[r]);
    }
    add("second_moment", qb, qs, mean_of(qb), mean_of(qs));
    // cross moments are compared; with equal means this tests the autocovariance
    add("autocovariance", cb, cs, mean_of(cb) - mean_of(sb.y) * mean_of(sb.neighbor),
        mean_of(cs) - mean_of(ss.y) * mean_of(ss.neighbor));
  }
  rep.flagged = rep.max_abs_z >= 3.0;
  return rep;
}

void StationarityReport::write_csv(std::ostream& out) const {
  out << "shift,h,xi,statistic,base,shifted,z\n";
  for (const auto& it : items) {
    const auto& s = shifts[it.shift];
    std::string xi;
    for (double v : s.xi) xi += (xi.empty() ? "" : ";") + csv::format(v);
    out << it.shift << ',' << csv::format(s.h) << ',' << xi << ',' << it.statistic << ',' << csv::format(it.base)
        << ',' << csv::format(it.shifted) << ',' << csv::format(it.z) << '\n';
  }
}

ContinuityReport continuity_probe(const ModelSpec& model, const Node& node,
                                  const std::vector<std::pair<double, std::vector<double>>>& offsets,
                                  const SimConfig& cfg) {
  cfg.validate();
  model.validate();
  const std::size_t d = node.x.size();
  if (static_cast<int>(d) != model.dimension()) throw std::invalid_argument("probe node dimension does not match the kernel");
  const double dt = 1.0 / cfg.level;
  const double side = cfg.side.value_or(dt);
  const double p = cfg.moment_p.value_or(model.p);
  Node n0{snap(node.t, dt), node.x};
  for (auto& v : n0.x) v = snap(v, side);

  // one grid holding the node and every offset node
  double t_hi = n0.t;
  std::vector<double> lo(d), hi(d);
  for (std::size_t a = 0; a < d; ++a) lo[a] = hi[a] = n0.x[a];
  std::vector<Node> others;
  for (const auto& [h, dx] : offsets) {
    if (dx.size() != d) throw std::invalid_argument("offset dimension does not match the node");
    Node o{snap(n0.t + h, dt), n0.x};
    for (std::size_t a = 0; a < d; ++a) {
      o.x[a] = snap(n0.x[a] + dx[a], side);
      lo[a] = std::min(lo[a], o.x[a]);
      hi[a] = std::max(hi[a], o.x[a]);
    }
    t_hi = std::max(t_hi, o.t);
    others.push_back(o);
  }
  for (std::size_t a = 0; a < d; ++a) {
    lo[a] -= cfg.reach;
    hi[a] += cfg.reach + side;
  }
  const SpaceTimeGrid g = window(model, cfg, t_hi, lo, hi);
  if (n0.t < g.time(0)) throw std::invalid_argument("continuity offsets exceed the probe history");
  Where where{g.locate(n0.t, n0.x)};
  for (const auto& o : others) where.push_back(g.locate(o.t, o.x));
  const auto v = sample(model, g, cfg, where);

  ContinuityReport rep;
  for (std::size_t k = 0; k < others.size(); ++k) {
    detail::Welford w;
    for (const auto& row : v) w.add(std::pow(std::abs(row[k + 1] - row[0]), p));
    ContinuityRow row;
    row.dt = others[k].t - n0.t;
    for (std::size_t a = 0; a < d; ++a) row.dx.push_back(others[k].x[a] - n0.x[a]);
    row.estimate = w.mean;
    row.se = w.se();
    rep.rows.push_back(row);
  }
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const double slack = 2.0 * std::hypot(rep.rows[k].se, rep.rows[k - 1].se);
    if (rep.rows[k].estimate > rep.rows[k - 1].estimate + slack) rep.decreasing = false;
  }
  return rep;
}

void ContinuityReport::write_csv(std::ostream& out) const {
  out << "dt,dx,estimate,se\n";
  for (const auto& r : rows) {
    std::string dx;
    for (double v : r.dx) dx += (dx.empty() ? "" : ";") + csv::format(v);
    out << csv::format(r.dt) << ',' << dx << ',' << csv::format(r.estimate) << ',' << csv::format(r.se) << '\n';
  }
}

}  // namespace lvx::sim
