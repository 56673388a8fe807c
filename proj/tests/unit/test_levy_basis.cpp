#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "lvx/levy_basis.hpp"
#include "lvx/rng.hpp"

using namespace lvx;
using namespace lvx::levy;

namespace {

Cell unit_cell(double vol) { return Cell{0.0, vol, {}, {}}; }

}  // namespace

TEST_CASE("truncated power switches exponent at one") {
  CHECK(truncated_power(2.0, 3.0, 0.5) == doctest::Approx(8.0));
  CHECK(truncated_power(-0.25, 3.0, 0.5) == doctest::Approx(0.5));
  CHECK(truncated_power(0.0, 3.0, 0.5) == 0.0);
}

TEST_CASE("point mass moments") {
  JumpMeasure jm(PointMasses{{{1.0, 0.5}, {-1.0, 0.5}, {3.0, 2.0}}});
  CHECK(jm.abs_moment(2.0, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(jm.abs_moment(1.0, 1.0, std::numeric_limits<double>::infinity()) == doctest::Approx(6.0));
  CHECK(jm.signed_moment(0.0, 1.0).value() == doctest::Approx(0.0));
  CHECK_FALSE(jm.symmetric());
}

TEST_CASE("exponential tail moments are gamma functions") {
  // intensity * rate^-r * Gamma(r + 1)
  JumpMeasure jm(ExponentialTails{2.0, 3.0, false});
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(jm.abs_moment(1.0, 0.0, inf) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(jm.abs_moment(2.0, 0.0, inf) == doctest::Approx(3.0 * 2.0 / 4.0).epsilon(1e-10));
  CHECK(jm.abs_moment(1.0, 1.0, inf) == doctest::Approx(3.0 * 0.5 * 3.0 * std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("effective drifts absorb the jump means") {
  LevyCharacteristics ch;
  ch.drift = 0.5;
  ch.jumps = JumpMeasure(PointMasses{{{0.5, 2.0}, {2.0, 1.0}}});
  const auto d = effective_drifts(ch);
  REQUIRE(d.b0);
  REQUIRE(d.b1);
  CHECK(*d.b0 == doctest::Approx(0.5 - 1.0));
  CHECK(*d.b1 == doctest::Approx(0.5 + 2.0));
}

TEST_CASE("pure drift cell is deterministic") {
  LevyCharacteristics ch;
  ch.drift = 2.0;
  CellStream s(1, 0, 7);
  CHECK(sample_cell(ch, unit_cell(1.0), s).value == 2.0);
  CellStream s2(1, 0, 8);
  CHECK(sample_cell(ch, unit_cell(0.25), s2).value == doctest::Approx(0.5));
}

TEST_CASE("Gaussian cell variance scales with volume") {
  LevyCharacteristics ch;
  ch.gaussian_variance = 1.5;
  const double vol = 0.125;
  const int n = 40000;
  double m = 0.0, m2 = 0.0;
  for (int k = 0; k < n; ++k) {
    CellStream s(42, 0, static_cast<std::uint64_t>(k));
    const double v = sample_cell(ch, unit_cell(vol), s).value;
    m += v;
    m2 += v * v;
  }
  m /= n;
  const double var = m2 / n - m * m;
  const double target = 1.5 * vol;
  // sd of the sample variance is about target * sqrt(2 / n)
  CHECK(std::abs(var - target) < 5.0 * target * std::sqrt(2.0 / n));
  CHECK(std::abs(m) < 5.0 * std::sqrt(target / n));
}

TEST_CASE("cell streams are reproducible and distinct") {
  CellStream a(9, 3, 11), b(9, 3, 11), c(9, 4, 11);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CellStream u(1, 1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("symmetric stable draws match the characteristic function") {
  // E cos(X) = exp(-scale^alpha) for S_alpha(scale, 0, 0)
  for (double alpha : {0.7, 1.0, 1.5, 1.9}) {
    const double scale = 0.8;
    const int n = 60000;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      CellStream s(5, 0, static_cast<std::uint64_t>(k));
      acc += std::cos(sample_stable(alpha, 0.0, scale, s));
    }
    const double target = std::exp(-std::pow(scale, alpha));
    CHECK(std::abs(acc / n - target) < 5.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("modulation averages and integrability") {
  SpatialModulation compact{ModulationKind::compact, 2.0, 1.0, 0.0};
  CHECK(compact({0.5}) == 2.0);
  CHECK(compact({1.5}) == 0.0);
  CHECK(compact.cell_average({0.5}, {1.5}) == doctest::Approx(1.0));
  CHECK(compact.integrable(2));
  SpatialModulation power{ModulationKind::power, 1.0, 1.0, 2.5};
  CHECK(power.integrable(2));
  CHECK_FALSE(power.integrable(3));
  SpatialModulation flat{ModulationKind::constant, 1.0, 1.0, 0.0};
  CHECK_FALSE(flat.integrable(1));
}
