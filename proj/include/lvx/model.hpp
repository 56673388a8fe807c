#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>

#include "lvx/kernels.hpp"
#include "lvx/levy_basis.hpp"

namespace lvx {

// Nonlinearity sigma with its declared constants. The closure is one of a
// few parametric forms so that declared and actual constants can be compared.
enum class SigmaForm {
  affine,  // offset + slope * y
  sine,    // offset + slope * sin(y)
  power,   // offset + slope * sign(y) |y|^exponent, exponent in (0, 1]
};

struct SigmaSpec {
  SigmaForm form = SigmaForm::affine;
  double offset = 0.0;
  double slope = 0.0;
  double exponent = 1.0;

  // declared constants; unset ones are inferred from the closure
  std::optional<double> lipschitz;        // C_{sigma,1}
  std::optional<double> growth_order;     // gamma in (0, 1]
  std::optional<double> growth_constant;  // C_{sigma,2}

  double operator()(double y) const;
  double at_zero() const { return (*this)(0.0); }
  bool is_constant() const { return slope == 0.0; }

  // nullopt when the closure is not globally Lipschitz
  std::optional<double> lipschitz_constant() const;
  double growth_gamma() const;
  double growth_coefficient() const;

  // spot-checks the declared constants against the closure on a grid of
  // arguments; returns a description of the first violation
  std::optional<std::string> consistency_error() const;
};

// I = [start, end]; start may be -inf (whole line), end may be +inf
struct TimeInterval {
  double start = 0.0;
  double end = 1.0;

  bool whole_line() const { return start == -std::numeric_limits<double>::infinity(); }
  bool unbounded_above() const { return end == std::numeric_limits<double>::infinity(); }
  double length() const { return end - start; }
};

enum class InitialKind {
  constant,     // Y0 = value
  exponential,  // Y0 = value * e^{rate t}
  smoothed,     // Y0(t, x) = int g(t - start, x - y) y0(y) dy with y0 = value
};

struct InitialData {
  InitialKind kind = InitialKind::constant;
  double value = 0.0;
  double rate = 0.0;

  double operator()(double t, std::span<const double> x, const kernels::Kernel& k, double start) const;
  bool spatially_constant() const { return true; }
};

// drift-convergence data: exponents alpha, beta and constant envelopes F0, F1;
// unset exponents default to p
struct DriftEnvelope {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> f0;
  std::optional<double> f1;
};

struct ModelSpec {
  kernels::Kernel kernel = kernels::Kernel::heat(1.0, 1);
  levy::LevyCharacteristics chars;
  SigmaSpec sigma;
  double p = 2.0;
  double q = 2.0;
  DriftEnvelope drift;
  double eta = 0.0;  // weight w(t, x) = e^{eta t}
  TimeInterval interval;
  InitialData initial;

  int dimension() const { return kernel.dimension(); }
  double weight(double t) const { return std::exp(eta * t); }
  void validate() const;
};

// envelopes F0, F1 (constants) for the drift-convergence bounds with the
// exponents in env; unset entries are derived from the characteristics and
// may be +inf when no constant exists
DriftEnvelope resolve_drift_envelope(const levy::LevyCharacteristics& chars, DriftEnvelope env, double p);

// bounds over x of the modulated characteristics pi(x, dz) = pi1(x) pi0(dz)

// sup_x |b1(x)|; nullopt when int_{|z|>1} |z| pi0 diverges
std::optional<double> b1_sup(const levy::LevyCharacteristics& chars);
// b0(x) = 0 for every x; false when the small-jump mean diverges
bool b0_vanishes(const levy::LevyCharacteristics& chars);
// sup_x int |z|^r_s pi(x, dz)
double jump_moment_sup(const levy::LevyCharacteristics& chars, double r, double s);

}  // namespace lvx
