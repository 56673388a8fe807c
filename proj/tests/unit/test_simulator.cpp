#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "lvx/simulator.hpp"

using namespace lvx;
using namespace lvx::sim;

namespace {

ModelSpec additive_heat(double noise_scale) {
  ModelSpec m;
  m.kernel = kernels::Kernel::heat(1.0, 1);
  m.chars.gaussian_variance = 1.0;
  m.sigma.form = SigmaForm::affine;
  m.sigma.offset = noise_scale;
  m.sigma.slope = 0.0;
  m.p = 2.0;
  m.q = 2.0;
  m.interval = {0.0, std::numeric_limits<double>::infinity()};
  return m;
}

SimConfig small_config(std::size_t replicates) {
  SimConfig c;
  c.level = 4;
  c.replicates = replicates;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("grid covers the requested window") {
  const auto g = build_grid(1.0, {-1.0}, {1.0}, 4, 0.0);
  CHECK(g.steps == 4);
  CHECK(g.time(0) == doctest::Approx(0.0));
  CHECK(g.time(4) == doctest::Approx(1.0));
  CHECK(g.space_count() == 8);
  CHECK(g.corner(0)[0] == doctest::Approx(-1.0));
  // history is limited to N time units
  const auto h = build_grid(10.0, {0.0}, {0.5}, 2);
  CHECK(h.time(0) == doctest::Approx(8.0));
  CHECK(h.steps == 4);
  CHECK_THROWS(build_grid(1.0, {1.0}, {0.0}, 4));
  // whole line, N = 2: nodes -1, -0.5, ..., 1 and four cells of side 0.5
  const auto w = build_grid(1.0, {-1.0}, {1.0}, 2);
  CHECK(w.time_nodes() == 5);
  CHECK(w.time(0) == doctest::Approx(-1.0));
  CHECK(w.space_count() == 4);
  CHECK(w.lattice.side == doctest::Approx(0.5));
}

TEST_CASE("noise is keyed by lattice cells") {
  ModelSpec m = additive_heat(1.0);
  const auto a = build_grid(1.0, {-1.0}, {1.0}, 4, 0.0);
  const auto b = build_grid(1.0, {0.0}, {2.0}, 4, 0.0);
  const auto na = simulate_noise(m.chars, a, 11, 2);
  const auto nb = simulate_noise(m.chars, b, 11, 2);
  // cell x in [0, 0.25) is column 4 of a and column 0 of b
  for (std::size_t i = 0; i < a.time_cells(); ++i) CHECK(na.at(i, 4) == nb.at(i, 0));
  const auto again = simulate_noise(m.chars, a, 11, 2);
  CHECK(again.values == na.values);
  const auto other = simulate_noise(m.chars, a, 11, 3);
  CHECK(other.values != na.values);
}

TEST_CASE("deterministic drift noise is exact") {
  levy::LevyCharacteristics ch;
  ch.drift = 2.0;
  const auto g = build_grid(1.0, {0.0}, {1.0}, 4, 0.0);
  const auto n = simulate_noise(ch, g, 1);
  for (double v : n.values) CHECK(v == doctest::Approx(2.0 / 16.0));
}

TEST_CASE("zero sigma leaves the initial data") {
  ModelSpec m = additive_heat(0.0);
  m.initial.value = 1.5;
  const auto g = build_grid(1.0, {-1.0}, {1.0}, 4, 0.0);
  const auto noise = simulate_noise(m.chars, g, 5);
  const auto path = solve_path(m, g, noise, small_config(1));
  for (double v : path.values) CHECK(v == doctest::Approx(1.5));
}

TEST_CASE("additive solutions are linear in sigma") {
  const auto g = build_grid(1.0, {-1.0}, {1.0}, 4, 0.0);
  ModelSpec m1 = additive_heat(1.0), m3 = additive_heat(3.0);
  const auto noise = simulate_noise(m1.chars, g, 5);
  const auto p1 = solve_path(m1, g, noise, small_config(1));
  const auto p3 = solve_path(m3, g, noise, small_config(1));
  for (std::size_t k = 0; k < p1.values.size(); ++k) CHECK(p3.values[k] == doctest::Approx(3.0 * p1.values[k]));
}

TEST_CASE("forward marching and Picard agree") {
  ModelSpec m = additive_heat(0.5);
  m.sigma.slope = 0.5;
  m.initial.value = 1.0;
  const auto g = build_grid(1.0, {-1.0}, {1.0}, 4, 0.0);
  const auto noise = simulate_noise(m.chars, g, 8);
  auto cfg = small_config(1);
  const auto fwd = solve_path(m, g, noise, cfg);
  cfg.mode = SolveMode::picard;
  const auto pic = solve_path(m, g, noise, cfg);
  for (std::size_t k = 0; k < fwd.values.size(); ++k) CHECK(pic.values[k] == doctest::Approx(fwd.values[k]).epsilon(1e-9));
  CHECK(!pic.trace.empty());
}

TEST_CASE("constant fields have exact moments") {
  ModelSpec m = additive_heat(0.0);
  m.initial.value = 2.0;
  const auto g = build_grid(1.0, {-1.0}, {1.0}, 4, 0.0);
  const auto e = estimate_moments(m, g, small_config(16));
  for (std::size_t k = 0; k < e.moment.size(); ++k) {
    CHECK(e.moment[k] == doctest::Approx(4.0));
    CHECK(e.se[k] == 0.0);
  }
  std::ostringstream out;
  e.write_csv(out);
  CHECK(out.str().rfind("t,x1,moment,se,mean,mean_se", 0) == 0);
}

TEST_CASE("moment estimates do not depend on the worker cap") {
  ModelSpec m = additive_heat(1.0);
  const auto g = build_grid(1.0, {-0.5}, {0.5}, 4, 0.0);
  const auto a = estimate_moments(m, g, small_config(300));
  setenv("LVX_THREADS", "1", 1);
  const auto b = estimate_moments(m, g, small_config(300));
  unsetenv("LVX_THREADS");
  CHECK(a.moment == b.moment);
  CHECK(a.sup_statistic == b.sup_statistic);
}

TEST_CASE("kernel table lag one is a time average") {
  const auto k = kernels::Kernel::exponential(1.0);
  Lattice lat{4, 0.25, 0.25};
  KernelTable t(k, lat, 3, {}, Corner::upper_right);
  // (1/dt) int_0^dt e^{-s} ds
  CHECK(t(1, {}) == doctest::Approx(-std::expm1(-0.25) / 0.25).epsilon(1e-10));
  CHECK(t(2, {}) == doctest::Approx(std::exp(-0.25)));
}

TEST_CASE("stationarity probe rejects inhomogeneous jump intensities") {
  ModelSpec m = additive_heat(1.0);
  m.chars.jumps = levy::JumpMeasure(levy::PointMasses{{{1.0, 1.0}}});
  m.chars.modulation = {levy::ModulationKind::compact, 1.0, 1.0, 0.0};
  CHECK_THROWS_AS(stationarity_probe(m, {1.0, {0.0}}, {{1.0, {0.0}}}, small_config(10)), std::invalid_argument);
}

TEST_CASE("continuity probe returns one row per offset") {
  ModelSpec m = additive_heat(1.0);
  m.interval.start = -std::numeric_limits<double>::infinity();
  auto cfg = small_config(200);
  cfg.reach = 1.0;
  std::vector<std::pair<double, std::vector<double>>> offs{{0.0, {1.0}}, {0.0, {0.5}}, {0.0, {0.25}}};
  const auto r = continuity_probe(m, {2.0, {0.0}}, offs, cfg);
  REQUIRE(r.rows.size() == 3);
  for (const auto& row : r.rows) CHECK(row.estimate > 0.0);
  CHECK(r.rows[0].estimate > r.rows[2].estimate);
}
