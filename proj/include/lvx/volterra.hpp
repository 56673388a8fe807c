#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lvx/kernels.hpp"
#include "lvx/model.hpp"

namespace lvx::volterra {

// G(t, x; s, y) = coefficient * e^{-decay (t - s)} * phi(g(t - s, x - y)) with
// phi(g) = |g|^power_{small_power} (power where g > 1, small_power where
// g <= 1) unless a custom transform is supplied.
struct VolterraKernel {
  kernels::Kernel base = kernels::Kernel::exponential(1.0);
  double coefficient = 1.0;
  double power = 1.0;
  std::optional<double> small_power;
  std::function<double(double)> transform;  // phi(g); must vanish at 0
  double decay = 0.0;

  bool pure_power() const { return !transform && (!small_power || *small_power == power) && power > 0.0; }
  double phi(double g) const;
  // H(tau) = int G(tau, y) dy
  double density(double tau) const;
  // int_0^tau H; tau may be +inf
  double mass(double tau) const;
  // int over the box [lo, hi] of G(tau, .), pure power kernels only
  double box_mass(double tau, std::span<const double> lo, std::span<const double> hi) const;
  // H(tau) ~ tau^c as tau -> 0, when known
  std::optional<double> singular_exponent() const;
};

// v(t,x) = f(t,x) + sum_l ( int int G_l(t,x;s,y) v(s,y)^{p gamma} ds dy )^{1/p}
// on I = [start, end]; start = -inf is the whole line (-inf, end].
struct VolterraProblem {
  std::vector<VolterraKernel> kernels;
  std::function<double(double, std::span<const double>)> force = [](double, std::span<const double>) { return 0.0; };
  bool force_spatially_constant = true;
  // f is unbounded as t -> -inf (whole line only); the sup norm is then infinite
  bool force_unbounded_below = false;
  double p = 1.0;
  double gamma = 1.0;
  double start = 0.0;
  double end = 1.0;
  int dimension = 0;

  bool whole_line() const;
  void validate() const;
};

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int points = 1;
  double step() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
  double at(int i) const { return points > 1 ? lo + i * step() : lo; }
};

struct FieldGrid {
  std::vector<double> times;
  std::vector<Axis> axes;  // empty for d = 0

  static FieldGrid uniform_time(double t0, double t1, std::size_t steps);
  std::size_t space_points() const;
  std::size_t size() const { return times.size() * space_points(); }
  std::vector<double> point(std::size_t space_index) const;
};

struct Field {
  FieldGrid grid;
  std::vector<double> values;  // values[time_index * space_points + space_index]
  double eta = 0.0;            // values are relative to w(t, x) = e^{eta t}
  bool divergent = false;

  double at(std::size_t ti, std::size_t si = 0) const { return values[ti * grid.space_points() + si]; }
  double sup() const;
  void write_csv(std::ostream& out) const;
};

struct Partition {
  std::vector<double> breakpoints;  // t_0 < ... < t_{k+1}; t_0 may be -inf
  std::vector<double> rho_per_interval;
  double rho = 0.0;
  std::size_t intervals() const { return breakpoints.size() < 2 ? 0 : breakpoints.size() - 1; }
};

// sup_j sup_t sum_l ( int_{I_j} int G_l(t, x; s, y) ds dy )^{1/p}
double partition_rho(const VolterraProblem& problem, Partition& partition);

struct PartitionSearch {
  bool success = false;
  Partition partition;
  double irreducible_mass = 0.0;  // sum_l (int_0^inf H_l)^{1/p} on the whole line
  std::string message;
};

PartitionSearch find_contraction_partition(const VolterraProblem& problem, std::size_t max_intervals = 4096);

struct TraceEntry {
  int iteration = 0;
  double sup_difference = 0.0;
  double bound = 0.0;  // binom(n+k-1, n) rho^n |v1 - v0|
};

struct PicardResult {
  Field solution;
  std::vector<TraceEntry> trace;
  bool converged = false;
  int iterations = 0;
  Partition partition;
  double history_length = 0.0;  // burn-in window used on the whole line
};

struct PicardOptions {
  double tol = 1e-10;
  int max_iter = 500;
  std::optional<double> step;  // internal time step; defaults to the grid spacing
  std::optional<Partition> partition;
};

// Throws NumericalFailure on non-contraction or max_iter exhaustion.
PicardResult picard_solve(const VolterraProblem& problem, const FieldGrid& grid, const PicardOptions& opts = {});

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace);

struct Comparison {
  bool pass = false;
  double max_violation = 0.0;  // max(candidate - solution, 0)
};

Comparison comparison_bound(const VolterraProblem& problem, const Field& candidate, const PicardOptions& opts = {});
Comparison compare_fields(const Field& candidate, const Field& bound, double slack = 0.0);

// unique positive root of a - F - theta a^gamma = 0
double stability_fixed_point(double F, double theta, double gamma);

// solution set of v(t) = 1 + int_{-inf}^t e^{-lambda (t-s)} v(s) ds, or of the
// weighted variant with force e^{alpha t} (needs lambda > 0, alpha + lambda > 1)
struct ExpKernelFamily {
  enum class Kind { none, linear, exponential };
  Kind kind = Kind::none;
  double lambda = 0.0;
  std::optional<double> alpha;
  double constant = 0.0;       // particular part: lambda/(lambda-1), resp. (alpha+lambda)/(alpha+lambda-1)
  double free_exponent = 0.0;  // c e^{free_exponent t}
  bool bounded_unique = false;
  std::string describe() const;
  // member with free constant c
  double evaluate(double t, double c) const;
};

ExpKernelFamily exp_kernel_family(double lambda, std::optional<double> alpha = std::nullopt);

enum class BoundMode { automatic, lipschitz, growth };

struct MomentBoundOptions {
  BoundMode mode = BoundMode::automatic;
  PicardOptions picard;
};

// Volterra problem whose solution bounds ||Y(t,x)||_{L^p} / w(t,x)^{1/(p v 1)}
struct MomentProblem {
  VolterraProblem problem;
  // value added back after solving (shift of the Lipschitz substitution)
  std::function<double(double)> shift = [](double) { return 0.0; };
  bool linear_only = false;  // solution given directly by the force
  BoundMode mode = BoundMode::lipschitz;
};

MomentProblem build_moment_problem(const ModelSpec& model, BoundMode mode = BoundMode::automatic);
// trace, when given, receives the Picard trace (empty for closed-form cases)
Field moment_bound(const ModelSpec& model, const FieldGrid& grid, const MomentBoundOptions& opts = {},
                   std::vector<TraceEntry>* trace = nullptr);

}  // namespace lvx::volterra
