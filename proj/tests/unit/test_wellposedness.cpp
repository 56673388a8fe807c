#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lvx/config.hpp"
#include "lvx/wellposedness.hpp"

using namespace lvx;
using namespace lvx::wellposedness;

namespace {

ConditionReport run_preset(const std::string& name) {
  const auto rc = config::load(config::resolve_preset(name));
  return check(rc.model, rc.checker);
}

std::string first_failure(const ConditionReport& r) {
  const auto* f = r.first_failure();
  return f ? f->id : std::string();
}

}  // namespace

TEST_CASE("BDG constant branches") {
  CHECK(bdg_constant(0.5) == 1.0);
  CHECK(bdg_constant(1.0) == 2.0);
  CHECK(bdg_constant(2.0) == 1.0);
  CHECK(bdg_constant(1.5) == doctest::Approx(std::sqrt(12.0)));
  CHECK_THROWS(bdg_constant(2.5));
}

TEST_CASE("squared heat kernel is excluded from two dimensions") {
  CHECK(run_preset("ex3.1-d1").overall() == Verdict::pass);
  const auto d2 = run_preset("ex3.1-d2");
  CHECK(d2.overall() == Verdict::fail);
  CHECK(first_failure(d2) == "local_integrability");
}

TEST_CASE("heavy tails need a spatially decaying intensity") {
  CHECK(run_preset("ex3.3-compact").overall() == Verdict::pass);
  const auto hom = run_preset("ex3.3-homogeneous");
  CHECK(hom.overall() == Verdict::fail);
  CHECK(first_failure(hom) == "space_decay");
}

TEST_CASE("size condition left-hand sides") {
  const auto ok = run_preset("ex4.4");
  CHECK(ok.overall() == Verdict::pass);
  REQUIRE(ok.size_lhs);
  CHECK(*ok.size_lhs == doctest::Approx(0.5).epsilon(1e-8));
  const auto edge = run_preset("ex4.4-boundary");
  REQUIRE(edge.size_lhs);
  CHECK(*edge.size_lhs == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(first_failure(edge) == "size_condition");
  CHECK(run_preset("ex4.4-weighted").overall() == Verdict::pass);
}

TEST_CASE("undamped heat stability depends on the dimension") {
  for (const char* name : {"ex5.2-d1", "ex5.2-d2"}) {
    const auto r = run_preset(name);
    CHECK(r.overall() == Verdict::fail);
    CHECK(first_failure(r) == "jump_growth");
  }
  const auto d3 = run_preset("ex5.2-d3");
  CHECK(d3.overall() == Verdict::pass);
  const auto* frac = d3.find("fractional_branch");
  REQUIRE(frac);
  CHECK(frac->verdict == Verdict::pass);
  const auto* size = d3.find("size_condition");
  REQUIRE(size);
  CHECK(size->note.find("nan") == std::string::npos);
}

TEST_CASE("report text and csv carry every item") {
  const auto r = run_preset("ex3.1-d1");
  const auto text = r.text();
  for (const auto& it : r.items) CHECK(text.find(it.id) != std::string::npos);
  std::ostringstream csv;
  r.write_csv(csv);
  CHECK(csv.str().rfind("checker,id,group", 0) == 0);
}

TEST_CASE("checker names round trip") {
  for (const char* n : {"finite_horizon", "heavy_tail", "infinite_memory", "asymptotic_stability"})
    CHECK(to_string(parse_checker(n)) == n);
  CHECK_THROWS(parse_checker("bogus"));
}
