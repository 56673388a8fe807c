#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lvx/levy_basis.hpp"
#include "lvx/model.hpp"
#include "lvx/volterra.hpp"

namespace lvx::sim {

// Cells live on a global lattice: time cell i is (i dt, (i+1) dt], spatial
// cell j is prod [j_k h, (j_k + 1) h). Noise is keyed by lattice indices, so
// overlapping grids and probe windows see the same realization.
struct Lattice {
  int level = 1;     // N
  double dt = 1.0;   // 1 / N
  double side = 1.0; // spatial cell side, 1 / N unless overridden
};

struct SpaceTimeGrid {
  Lattice lattice;
  std::int64_t t_first = 0;  // time nodes are (t_first + i) dt, i = 0..time_cells()
  std::size_t steps = 0;
  std::vector<std::int64_t> space_first;  // per axis, first cell index
  std::vector<std::size_t> space_cells;   // per axis, number of cells

  int dimension() const { return static_cast<int>(space_first.size()); }
  std::size_t time_nodes() const { return steps + 1; }
  std::size_t time_cells() const { return steps; }
  std::size_t space_count() const;
  double time(std::size_t i) const;
  std::vector<double> times() const;
  std::vector<std::int64_t> space_index(std::size_t j) const;  // global indices
  std::vector<double> corner(std::size_t j) const;             // lower-left corner
  levy::Cell cell(std::size_t i, std::size_t j) const;         // (s_i, s_{i+1}] x Q_j
  double mesh() const;                                         // max(dt, side)
  // node nearest to (t, x); throws if outside
  std::pair<std::size_t, std::size_t> locate(double t, const std::vector<double>& x) const;
};

// level-N grid covering [max(T - N, t0), T] x box; T and the box are snapped
// outward to the lattice
SpaceTimeGrid build_grid(double T, const std::vector<double>& box_lo, const std::vector<double>& box_hi, int N,
                         double t0 = -std::numeric_limits<double>::infinity(),
                         std::optional<double> side = std::nullopt);

enum class Corner { lower_left, upper_right };
enum class SolveMode { forward, picard };

struct SimConfig {
  int level = 8;
  std::optional<double> side;
  double tol = 1e-12;
  int max_iter = 1000;
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
  std::optional<double> moment_p;  // defaults to the model's p
  Corner corner = Corner::lower_left;
  SolveMode mode = SolveMode::forward;
  double reach = 6.0;                // spatial half-width of probe windows
  std::optional<double> history;     // probe history length; defaults to N (capped by the start)
  std::size_t jackknife_groups = 20;

  void validate() const;
};

struct NoiseField {
  SpaceTimeGrid grid;
  std::vector<double> values;  // [time_cell * space_count + space_cell]
  double at(std::size_t i, std::size_t j) const { return values[i * grid.space_count() + j]; }
};

// increment of the global cell (i, js) for a replicate
double lattice_noise(const levy::LevyCharacteristics& chars, const Lattice& lat, std::int64_t i,
                     const std::vector<std::int64_t>& js, std::uint64_t seed, std::uint64_t replicate);

NoiseField simulate_noise(const levy::LevyCharacteristics& chars, const SpaceTimeGrid& grid, std::uint64_t seed,
                          std::uint64_t replicate = 0);

struct PathField {
  SpaceTimeGrid grid;
  std::vector<double> values;  // [time_node * space_count + space_cell]
  std::vector<volterra::TraceEntry> trace;
  double at(std::size_t i, std::size_t j) const { return values[i * grid.space_count() + j]; }
};

// discrete kernel weights W[lag][offset]; lag 1 is the cell average
class KernelTable {
 public:
  KernelTable(const kernels::Kernel& k, const Lattice& lat, std::size_t max_lag,
              const std::vector<std::size_t>& reach_cells, Corner corner);
  // weight for lag >= 1 and per-axis offsets (node cell - source cell)
  double operator()(std::size_t lag, const std::vector<std::int64_t>& offset) const;
  double at(std::size_t lag, std::size_t flat_offset) const { return w_[(lag - 1) * stride_ + flat_offset]; }
  std::size_t flat(const std::vector<std::int64_t>& offset) const;
  std::size_t max_lag() const { return max_lag_; }

 private:
  std::size_t max_lag_;
  std::vector<std::size_t> reach_;
  std::size_t stride_ = 1;
  std::vector<double> w_;
};

// Y = Y0 + sum G sigma(Y) Lambda over grid nodes; force_shift is added to Y0
PathField solve_path(const ModelSpec& model, const SpaceTimeGrid& grid, const NoiseField& noise,
                     const SimConfig& cfg, double force_shift = 0.0);

// sup over nodes of sum |W| C_sigma1 |Lambda|: contraction factor of the
// discrete system in the sup norm
double discrete_contraction(const ModelSpec& model, const SpaceTimeGrid& grid, const NoiseField& noise,
                            const SimConfig& cfg);

struct Node {
  double t = 0.0;
  std::vector<double> x;
};

struct PathEnsemble {
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double p = 2.0;
  bool estimable = true;
  std::string note;
  std::vector<Node> nodes;
  std::vector<double> moment;  // E|Y|^p estimates per node
  std::vector<double> se;
  std::vector<double> mean;    // E Y per node
  std::vector<double> mean_se;
  double eta = 0.0;
  double sup_statistic = 0.0;  // sup_nodes (E|Y|^p / w)^{1/(p v 1)}
  double sup_se = 0.0;         // grouped jackknife
  std::vector<PathField> paths;  // first replicates, when requested

  void write_csv(std::ostream& out, const std::vector<double>* bound = nullptr) const;
};

// moments over every grid node, or over the given nodes (snapped to the grid);
// keep_paths stores that many replicate paths
PathEnsemble estimate_moments(const ModelSpec& model, const SpaceTimeGrid& grid, const SimConfig& cfg,
                              const std::vector<Node>& probes = {}, std::size_t keep_paths = 0);

// upper bound on E|Y(t,x)|^p at each node implied by the deterministic
// moment bound; +inf where the bound diverges
std::vector<double> moment_bound_at(const ModelSpec& model, const std::vector<Node>& nodes,
                                    const volterra::MomentBoundOptions& opts = {});

struct Shift {
  double h = 0.0;
  std::vector<double> xi;
};

struct Discrepancy {
  std::size_t shift = 0;
  std::string statistic;  // mean, second_moment, autocovariance
  double base = 0.0;
  double shifted = 0.0;
  double z = 0.0;
};

struct StationarityReport {
  std::vector<Shift> shifts;
  std::vector<Discrepancy> items;
  double max_abs_z = 0.0;
  bool flagged = false;  // some |z| >= 3
  void write_csv(std::ostream& out) const;
};

StationarityReport stationarity_probe(const ModelSpec& model, const Node& base, const std::vector<Shift>& shifts,
                                      const SimConfig& cfg);

struct ContinuityRow {
  double dt = 0.0;
  std::vector<double> dx;
  double estimate = 0.0;  // E|Y(node) - Y(node + offset)|^p
  double se = 0.0;
};

struct ContinuityReport {
  std::vector<ContinuityRow> rows;
  bool decreasing = true;  // nonincreasing within 2 SE along the list
  void write_csv(std::ostream& out) const;
};

ContinuityReport continuity_probe(const ModelSpec& model, const Node& node,
                                  const std::vector<std::pair<double, std::vector<double>>>& offsets,
                                  const SimConfig& cfg);

}  // namespace lvx::sim
