#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lvx/kernels.hpp"

using namespace lvx::kernels;

TEST_CASE("heat kernel mass decays with the damping") {
  for (int d : {1, 2, 3}) {
    const auto k = Kernel::heat(0.7, d);
    for (double t : {0.01, 0.5, 3.0}) CHECK(k.spatial_power(t, 1.0) == doctest::Approx(std::exp(-0.7 * t)));
  }
}

TEST_CASE("heat kernel pointwise value") {
  const auto k = Kernel::heat(0.0, 1);
  const std::vector<double> x{0.5};
  const double t = 0.25;
  const double expect = std::exp(-0.25 / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
  CHECK(k(t, x) == doctest::Approx(expect));
  CHECK(k.radial(t, 0.5) == doctest::Approx(expect));
  CHECK(k(-1.0, x) == 0.0);
}

TEST_CASE("heat lp norm closed form agrees with quadrature") {
  for (int d : {1, 2, 3}) {
    const double pmax = 1.0 + 2.0 / d;
    for (double p : {0.5, 1.0, 0.5 * (1.0 + pmax)}) {
      const auto k = Kernel::heat(1.3, d);
      const auto cf = lp_norm(k, p, 2.0, NormMethod::closed_form);
      const auto qd = lp_norm(k, p, 2.0, NormMethod::quadrature);
      CHECK(cf.method == NormMethod::closed_form);
      CHECK(qd.value == doctest::Approx(cf.value).epsilon(1e-7));
    }
  }
}

TEST_CASE("squared one-dimensional heat kernel integrates to one quarter") {
  // int_0^inf int g_1^2 = int_0^inf e^{-2t} / sqrt(8 pi t) dt = 1/4
  const auto k = Kernel::heat(1.0, 1);
  CHECK(lp_norm(k, 2.0, kInfinity).value == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("local integrability threshold") {
  for (int d : {1, 2, 3}) {
    const double crit = 1.0 + 2.0 / d;
    const auto k = Kernel::heat(0.5, d);
    CHECK(locally_p_integrable(k, 0.9 * crit));
    CHECK_FALSE(locally_p_integrable(k, crit));
    CHECK_FALSE(locally_p_integrable(k, 1.1 * crit));
  }
  CHECK(locally_p_integrable(Kernel::exponential(-1.0), 4.0));
}

TEST_CASE("exponential kernel norms") {
  const auto k = Kernel::exponential(2.0);
  CHECK(lp_norm(k, 1.5, 1.0).value == doctest::Approx(-std::expm1(-3.0) / 3.0));
  CHECK(lp_norm(k, 1.0, kInfinity).value == doctest::Approx(0.5));
  CHECK_FALSE(lp_norm(Kernel::exponential(-0.5), 1.0, kInfinity).finite());
}

TEST_CASE("truncated norm of the undamped heat kernel") {
  // finite on the half line iff p < 1 + 2/d < q
  const auto k1 = Kernel::heat(0.0, 1);
  CHECK(truncated_lp_norm(k1, 2.0, 4.0, kInfinity).finite());
  CHECK_FALSE(truncated_lp_norm(k1, 2.0, 2.5, kInfinity).finite());
  const auto k3 = Kernel::heat(0.0, 3);
  CHECK(truncated_lp_norm(k3, 1.0, 1.8, kInfinity).finite());
}

TEST_CASE("transform norm reproduces the power norm") {
  const auto k = Kernel::heat(1.0, 2);
  const auto direct = lp_norm(k, 1.5, 1.0);
  const auto viaphi = transform_norm(k, [](double g) { return std::pow(g, 1.5); }, 1.0, 0.0, -0.5);
  CHECK(viaphi.value == doctest::Approx(direct.value).epsilon(1e-6));
}

TEST_CASE("box average of the heat kernel sums to the mass") {
  const auto k = Kernel::heat(0.0, 1);
  const double t = 0.2;
  double total = 0.0;
  for (int j = -40; j < 40; ++j) {
    const std::vector<double> lo{0.1 * j}, hi{0.1 * (j + 1)};
    total += 0.1 * k.box_average_power(t, lo, hi, 1.0);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
}
