#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lvx/rng.hpp"

namespace lvx::levy {

struct PointMass {
  double size;
  double rate;  // intensity per unit space-time volume
};

struct NoJumps {};
struct PointMasses {
  std::vector<PointMass> atoms;
};
// density intensity*rate*exp(-rate*z) on z > 0; two_sided spreads it
// symmetrically over the real line with half the density on each side
struct ExponentialTails {
  double rate;
  double intensity;
  bool two_sided = false;
};
// Levy density c+ z^{-1-alpha} on z > 0 and c- |z|^{-1-alpha} on z < 0,
// normalized so that the increment over unit volume is S_alpha(scale, skew, .)
struct AlphaStable {
  double index;
  double scale = 1.0;
  double skew = 0.0;
};
// piecewise linear density through (size, density) nodes, zero outside
struct TabulatedJumps {
  std::vector<double> sizes;
  std::vector<double> density;
};

class JumpMeasure {
 public:
  using Family = std::variant<NoJumps, PointMasses, ExponentialTails, AlphaStable, TabulatedJumps>;

  JumpMeasure() = default;
  explicit JumpMeasure(Family family);

  const Family& family() const { return family_; }
  std::string name() const;
  bool empty() const;
  bool symmetric() const;
  bool is_stable() const { return std::holds_alternative<AlphaStable>(family_); }

  // int_{lo < |z| <= hi} |z|^r pi0(dz); hi may be +inf, lo may be 0
  double abs_moment(double r, double lo, double hi) const;
  // int_{lo < |z| <= hi} z pi0(dz); nullopt unless absolutely integrable
  std::optional<double> signed_moment(double lo, double hi) const;

  // stable tail constants c+ and c-
  std::pair<double, double> stable_constants() const;

 private:
  Family family_ = NoJumps{};
};

enum class ModulationKind { none, constant, compact, power };

// spatial factor pi1(x) bounding the jump intensity; time independent
struct SpatialModulation {
  ModulationKind kind = ModulationKind::none;
  double value = 1.0;
  double radius = 1.0;    // compact: support is the sup-norm ball of this radius
  double exponent = 0.0;  // power: value * max(1,|x|)^-exponent

  double operator()(const std::vector<double>& x) const;
  double sup() const;
  // average over the box [lower, upper]
  double cell_average(const std::vector<double>& lower, const std::vector<double>& upper) const;
  // int_{R^d} pi1(x) dx < infinity
  bool integrable(int dim) const;
};

struct LevyCharacteristics {
  double drift = 0.0;              // b per unit volume
  double gaussian_variance = 0.0;  // c per unit volume
  JumpMeasure jumps;
  SpatialModulation modulation;
  double small_jump_cutoff = 1e-3;
  bool declared_symmetric = false;

  bool symmetric() const;
  void validate() const;
};

struct EffectiveDrifts {
  std::optional<double> b0;  // b - int z 1{|z|<=1}
  std::optional<double> b1;  // b + int z 1{|z|>1}
};

// space-time cell: time interval times spatial box (empty box for d = 0)
struct Cell {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
  double volume() const;
};

struct NoiseIncrement {
  double value;
  Cell cell;
};

double truncated_power(double z, double r, double s);
double jump_moment(const JumpMeasure& jumps, double r, double s);
EffectiveDrifts effective_drifts(const LevyCharacteristics& chars);
NoiseIncrement sample_cell(const LevyCharacteristics& chars, const Cell& cell, CellStream& stream);

// draws an exact stable variate via Chambers-Mallows-Stuck in the
// S(alpha, beta, scale, 0) parameterization with zero location
double sample_stable(double alpha, double beta, double scale, CellStream& stream);

}  // namespace lvx::levy
