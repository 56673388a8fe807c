#include <cmath>
#include <limits>
#include <span>

#include "doctest.h"
#include "lvx/errors.hpp"
#include "lvx/volterra.hpp"

using namespace lvx;
using namespace lvx::volterra;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VolterraProblem renewal(double lambda, double start, double end) {
  VolterraProblem pr;
  VolterraKernel k;
  k.base = kernels::Kernel::exponential(lambda);
  pr.kernels = {k};
  pr.force = [](double, std::span<const double>) { return 1.0; };
  pr.start = start;
  pr.end = end;
  return pr;
}

}  // namespace

TEST_CASE("fixed point of a = 1 + sqrt(a)") {
  CHECK(stability_fixed_point(1.0, 1.0, 0.5) == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));
  const double a = stability_fixed_point(2.0, 0.5, 0.5);
  CHECK(a - 2.0 - 0.5 * std::sqrt(a) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS(stability_fixed_point(2.0, 0.5, 1.0));
  CHECK(stability_fixed_point(0.0, 0.0, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("exponential kernel solution sets") {
  const auto neg = exp_kernel_family(-0.5);
  CHECK(neg.kind == ExpKernelFamily::Kind::none);
  const auto one = exp_kernel_family(1.0);
  CHECK(one.kind == ExpKernelFamily::Kind::linear);
  const auto half = exp_kernel_family(0.5);
  CHECK(half.kind == ExpKernelFamily::Kind::exponential);
  CHECK(half.constant == doctest::Approx(-1.0));
  CHECK(half.free_exponent == doctest::Approx(0.5));
  CHECK_FALSE(half.bounded_unique);
  const auto two = exp_kernel_family(2.0);
  CHECK(two.constant == doctest::Approx(2.0));
  CHECK(two.free_exponent == doctest::Approx(-1.0));
  CHECK(two.bounded_unique);
  CHECK(two.evaluate(0.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("renewal equation on a finite interval") {
  // v = 1 + int_0^t e^{-2(t-s)} v(s) ds has v = 2 - e^{-t}
  const auto pr = renewal(2.0, 0.0, 2.0);
  const auto grid = FieldGrid::uniform_time(0.0, 2.0, 200);
  PicardOptions opts;
  opts.tol = 1e-12;
  const auto r = picard_solve(pr, grid, opts);
  CHECK(r.converged);
  double err = 0.0;
  for (std::size_t i = 0; i < grid.times.size(); ++i)
    err = std::max(err, std::abs(r.solution.at(i) - (2.0 - std::exp(-grid.times[i]))));
  CHECK(err < 1e-4);
  REQUIRE(r.trace.size() >= 2);
  CHECK(r.trace.back().sup_difference <= r.trace.back().bound * (1.0 + 1e-9));
}

TEST_CASE("whole-line contraction partition") {
  const auto good = find_contraction_partition(renewal(2.0, -kInf, 0.0));
  CHECK(good.success);
  CHECK(good.partition.rho < 1.0);
  const auto bad = find_contraction_partition(renewal(0.5, -kInf, 0.0));
  CHECK_FALSE(bad.success);
  CHECK(bad.irreducible_mass == doctest::Approx(2.0));
  CHECK_THROWS_AS(picard_solve(renewal(0.5, -kInf, 0.0), FieldGrid::uniform_time(-1.0, 0.0, 10)),
                  NumericalFailure);
}

TEST_CASE("finite intervals always admit a partition") {
  auto pr = renewal(-1.0, 0.0, 3.0);
  Partition part;
  part.breakpoints = {0.0, 3.0};
  CHECK(partition_rho(pr, part) > 1.0);
  const auto s = find_contraction_partition(pr);
  CHECK(s.success);
  CHECK(s.partition.rho < 1.0);
}

TEST_CASE("comparison against the Picard solution") {
  const auto pr = renewal(2.0, 0.0, 1.0);
  const auto grid = FieldGrid::uniform_time(0.0, 1.0, 50);
  Field above{grid, std::vector<double>(grid.times.size(), 3.0)};
  // candidates must stay below the solution
  CHECK_FALSE(comparison_bound(pr, above).pass);
  Field below{grid, std::vector<double>(grid.times.size(), 1.0)};
  const auto c = comparison_bound(pr, below);
  CHECK(c.pass);
  CHECK(c.max_violation == 0.0);
  Field bad = below;
  bad.values.back() = 5.0;
  CHECK_FALSE(comparison_bound(pr, bad).pass);
}
