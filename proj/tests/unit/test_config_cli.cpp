#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lvx/cli.hpp"
#include "lvx/config.hpp"
#include "lvx/errors.hpp"

using namespace lvx;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lvx_unit" / name;
  std::filesystem::create_directories(dir);
  return dir.string();
}

int run_cli(const cli::Invocation& inv, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(inv, out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("parser reports the offending line") {
  const std::string text = "[kernel]\nfamily = heat\n\n[run]\np = 2\nbogus = 1\n";
  try {
    config::parse(text, "x.ini");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("x.ini:6") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(config::parse("[nowhere]\n", "x.ini"), ConfigError);
  CHECK_THROWS_AS(config::parse("[run]\np = 1\np = 2\n", "x.ini"), ConfigError);
}

TEST_CASE("comments and overrides") {
  auto t = config::parse("; header\n[run]\np = 1.5  # trailing\n", "x.ini");
  CHECK(t.at("run.p").value == "1.5");
  config::apply_override(t, "run.p=0.5", 1);
  CHECK(t.at("run.p").value == "0.5");
  CHECK(t.at("run.p").origin == "--set #1");
  CHECK_THROWS_AS(config::apply_override(t, "run.nope=1", 2), ConfigError);
  CHECK_THROWS_AS(config::apply_override(t, "no_equals", 3), ConfigError);
}

TEST_CASE("bad values name the field") {
  try {
    config::load(config::resolve_preset("ex3.1-d1"), {"run.p=abc"});
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.p") != std::string::npos);
  }
}

TEST_CASE("every preset loads") {
  for (const auto& entry : std::filesystem::directory_iterator(config::preset_dir())) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(config::load(entry.path().string()));
  }
}

TEST_CASE("check exit codes") {
  cli::Invocation inv;
  inv.command = "check";
  inv.config = config::resolve_preset("ex3.1-d1");
  inv.out_dir = scratch("check_pass");
  CHECK(run_cli(inv) == cli::success);
  CHECK(std::filesystem::exists(*inv.out_dir + "/report.txt"));
  CHECK(std::filesystem::exists(*inv.out_dir + "/report.csv"));
  inv.config = config::resolve_preset("ex3.1-d2");
  inv.out_dir = scratch("check_fail");
  CHECK(run_cli(inv) == cli::check_failed);
  inv.overrides = {"kernel.dimension=1"};
  CHECK(run_cli(inv) == cli::success);
  inv.overrides = {"kernel.unknown=1"};
  std::string text;
  CHECK(run_cli(inv, &text) == cli::usage_error);
  CHECK(text.find("unknown key") != std::string::npos);
}

TEST_CASE("usage errors") {
  cli::Invocation inv;
  inv.command = "frobnicate";
  inv.config = config::resolve_preset("ex3.1-d1");
  inv.out_dir = scratch("usage");
  CHECK(run_cli(inv) == cli::usage_error);
  inv.command = "check";
  inv.config = "/nonexistent/config.ini";
  CHECK(run_cli(inv) == cli::usage_error);
}

TEST_CASE("argv front end") {
  const std::string out = scratch("argv");
  const std::string cfg = config::resolve_preset("ex3.1-d1");
  std::vector<std::string> args{"lvx", "check", cfg, "--set", "kernel.damping=2", "--out", out};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  CHECK(cli::main(static_cast<int>(argv.size()), argv.data()) == cli::success);
  std::vector<std::string> bad{"lvx", "check"};
  std::vector<char*> argv2;
  for (auto& a : bad) argv2.push_back(a.data());
  CHECK(cli::main(static_cast<int>(argv2.size()), argv2.data()) == cli::usage_error);
}

TEST_CASE("non-contracting whole-line Picard is a numerical failure") {
  cli::Invocation inv;
  inv.command = "reproduce-example";
  inv.config = "ex4.1";
  inv.lambda = 0.5;
  inv.out_dir = scratch("ex41_half");
  std::string text;
  const int code = run_cli(inv, &text);
  // the family is unbounded, so the verdict fails without attempting Picard
  CHECK((code == cli::check_failed || code == cli::numerical_failure));

  inv = {};
  inv.command = "volterra";
  inv.config = config::resolve_preset("renewal");
  inv.overrides = {"kernel.decay=0.5", "run.start=-inf", "run.end=0"};
  inv.out_dir = scratch("renewal_half");
  CHECK(run_cli(inv) == cli::numerical_failure);
  CHECK(std::filesystem::exists(*inv.out_dir + "/trace.csv"));
}

TEST_CASE("volterra renewal writes the field") {
  cli::Invocation inv;
  inv.command = "volterra";
  inv.config = config::resolve_preset("renewal");
  inv.overrides = {"run.grid_steps=500"};
  inv.out_dir = scratch("renewal");
  CHECK(run_cli(inv) == cli::success);
  const auto field = read(*inv.out_dir + "/field.csv");
  CHECK(field.rfind("t,", 0) == 0);
}

TEST_CASE("simulate writes moments and respects the seed") {
  cli::Invocation inv;
  inv.command = "simulate";
  inv.config = config::resolve_preset("sim-additive-gauss");
  inv.overrides = {"run.replicates=50"};
  inv.seed = 77;
  inv.out_dir = scratch("sim_a");
  CHECK(run_cli(inv) == cli::success);
  const auto a = read(*inv.out_dir + "/moments.csv");
  inv.out_dir = scratch("sim_b");
  CHECK(run_cli(inv) == cli::success);
  CHECK(read(*inv.out_dir + "/moments.csv") == a);
  inv.seed = 78;
  inv.out_dir = scratch("sim_c");
  CHECK(run_cli(inv) == cli::success);
  CHECK(read(*inv.out_dir + "/moments.csv") != a);
}

TEST_CASE("simulate refuses models that fail the checker") {
  cli::Invocation inv;
  inv.command = "simulate";
  inv.config = config::resolve_preset("sim-additive-gauss");
  inv.overrides = {"kernel.dimension=2", "run.replicates=10", "run.box_lo=-0.25", "run.box_hi=0.25"};
  inv.out_dir = scratch("sim_refuse");
  CHECK(run_cli(inv) == cli::check_failed);
}
