#include "lvx/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lvx {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double SigmaSpec::operator()(double y) const {
  switch (form) {
    case SigmaForm::affine:
      return offset + slope * y;
    case SigmaForm::sine:
      return offset + slope * std::sin(y);
    case SigmaForm::power:
      return offset + slope * std::copysign(std::pow(std::abs(y), exponent), y);
  }
  return offset;
}

std::optional<double> SigmaSpec::lipschitz_constant() const {
  if (lipschitz) return lipschitz;
  if (slope == 0.0) return 0.0;
  if (form == SigmaForm::power && exponent < 1.0) return std::nullopt;
  return std::abs(slope);
}

double SigmaSpec::growth_gamma() const {
  if (growth_order) return *growth_order;
  return form == SigmaForm::power ? exponent : 1.0;
}

double SigmaSpec::growth_coefficient() const {
  if (growth_constant) return *growth_constant;
  return std::abs(slope);
}

std::optional<std::string> SigmaSpec::consistency_error() const {
  if (form == SigmaForm::power && !(exponent > 0.0 && exponent <= 1.0))
    return "power sigma needs exponent in (0, 1]";
  const double gamma = growth_gamma();
  if (!(gamma > 0.0 && gamma <= 1.0)) return "growth order must lie in (0, 1]";
  std::vector<double> ys;
  for (int i = -40; i <= 40; ++i) ys.push_back(std::copysign(std::pow(1.25, std::abs(i)) - 1.0, i) * 0.37);
  const auto lip = lipschitz_constant();
  const double c2 = growth_coefficient();
  const double s0 = std::abs(at_zero());
  std::ostringstream os;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    if (std::abs((*this)(y)) > (s0 + c2 * std::pow(std::abs(y), gamma)) * (1.0 + 1e-12) + 1e-300) {
      os << "growth bound |sigma(y)| <= |sigma(0)| + C2 |y|^gamma fails at y = " << y;
      return os.str();
    }
    if (!lip || i == 0) continue;
    const double x = ys[i - 1];
    if (std::abs((*this)(y) - (*this)(x)) > *lip * std::abs(y - x) * (1.0 + 1e-12)) {
      os << "Lipschitz bound fails between " << x << " and " << y;
      return os.str();
    }
  }
  return std::nullopt;
}

double InitialData::operator()(double t, std::span<const double>, const kernels::Kernel& k,
                               double start) const {
  switch (kind) {
    case InitialKind::constant:
      return value;
    case InitialKind::exponential:
      return value * std::exp(rate * t);
    case InitialKind::smoothed: {
      // y0 constant, so the spatial convolution is the spatial mass of g
      const double tau = std::isfinite(start) ? t - start : kInf;
      if (tau <= 0.0) return value;
      return value * k.spatial_power(tau, 1.0);
    }
  }
  return value;
}

void ModelSpec::validate() const {
  chars.validate();
  if (!(p > 0.0 && p <= 2.0)) throw std::invalid_argument("p must lie in (0, 2]");
  if (!(q > 0.0 && q <= 2.0)) throw std::invalid_argument("q must lie in (0, 2]");
  if (!(drift.alpha.value_or(p) <= 2.0)) throw std::invalid_argument("drift exponent alpha must be <= 2");
  if (!(drift.beta.value_or(p) >= 0.0)) throw std::invalid_argument("drift exponent beta must be >= 0");
  if (!std::isfinite(eta)) throw std::invalid_argument("weight exponent eta must be finite");
  if (!(interval.end > interval.start)) throw std::invalid_argument("time interval must be nonempty");
  if (std::isinf(interval.start) && interval.start > 0) throw std::invalid_argument("interval start cannot be +inf");
  if (initial.kind == InitialKind::smoothed && interval.whole_line())
    throw std::invalid_argument("smoothed initial data needs a finite start time");
  if (auto err = sigma.consistency_error()) throw std::invalid_argument("sigma: " + *err);
}

DriftEnvelope resolve_drift_envelope(const levy::LevyCharacteristics& chars, DriftEnvelope env, double p) {
  if (!env.alpha) env.alpha = p;
  if (!env.beta) env.beta = p;
  const double alpha = *env.alpha, beta = *env.beta;
  const double mod = chars.modulation.sup();
  const bool sym = chars.symmetric();
  const auto eff = levy::effective_drifts(chars);
  const double b = std::abs(chars.drift);
  if (!env.f1) {
    if (sym) {
      env.f1 = 0.0;
    } else if (beta <= 1.0) {
      env.f1 = b + mod * chars.jumps.abs_moment(beta, 1.0, kInf);
    } else {
      // A^{1-beta} -> 0 forces b1 = 0, then the remainder is a tail moment
      env.f1 = (eff.b1 && *eff.b1 == 0.0) ? mod * chars.jumps.abs_moment(beta, 1.0, kInf) : kInf;
    }
  }
  if (!env.f0) {
    if (sym) {
      env.f0 = 0.0;
    } else if (alpha >= 1.0) {
      env.f0 = b + mod * chars.jumps.abs_moment(alpha, 0.0, 1.0);
    } else {
      env.f0 = (eff.b0 && *eff.b0 == 0.0) ? mod * chars.jumps.abs_moment(alpha, 0.0, 1.0) : kInf;
    }
  }
  return env;
}

std::optional<double> b1_sup(const levy::LevyCharacteristics& chars) {
  const auto large = chars.jumps.signed_moment(1.0, kInf);
  if (!large) return std::nullopt;
  const double b = chars.drift, m = chars.modulation.sup() * *large;
  // pi1 ranges over [0, sup] unless it is constant
  const bool constant = chars.modulation.kind == levy::ModulationKind::none ||
                        chars.modulation.kind == levy::ModulationKind::constant;
  return constant ? std::abs(b + m) : std::max(std::abs(b), std::abs(b + m));
}

bool b0_vanishes(const levy::LevyCharacteristics& chars) {
  const auto small = chars.jumps.signed_moment(0.0, 1.0);
  if (!small) return false;
  const double m = chars.modulation.sup() * *small;
  const bool constant = chars.modulation.kind == levy::ModulationKind::none ||
                        chars.modulation.kind == levy::ModulationKind::constant;
  if (constant) return chars.drift - m == 0.0;
  return chars.drift == 0.0 && m == 0.0;
}

double jump_moment_sup(const levy::LevyCharacteristics& chars, double r, double s) {
  if (chars.jumps.empty() || chars.modulation.sup() == 0.0) return 0.0;
  return chars.modulation.sup() * levy::jump_moment(chars.jumps, r, s);
}

}  // namespace lvx
