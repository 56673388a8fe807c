#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lvx/model.hpp"
#include "lvx/simulator.hpp"
#include "lvx/volterra.hpp"
#include "lvx/wellposedness.hpp"

namespace lvx::config {

// Flat INI text with sections [kernel], [noise], [sigma], [run] and an
// optional [expect] block recording the verdict a preset should produce.
struct Entry {
  std::string value;
  std::string origin;  // "file:line" or "--set #k"
};

using Table = std::map<std::string, Entry>;  // "section.key" -> entry

// parses the text; syntax errors and unknown sections or keys throw
// ConfigError with the offending line
Table parse(const std::string& text, const std::string& name);
Table parse_file(const std::string& path);
// "section.key=value"; unknown keys throw ConfigError
void apply_override(Table& table, const std::string& assignment, std::size_t position);

// every accepted "section.key"
const std::vector<std::string>& known_keys();

enum class Equation { moment_bound, renewal };
enum class Probe { moments, stationarity, continuity };

struct Expectation {
  std::optional<std::string> verdict;
  std::optional<std::string> first_failure;
  std::optional<int> exit_code;
};

struct RunConfig {
  std::string source;
  ModelSpec model;
  wellposedness::Checker checker = wellposedness::Checker::automatic;
  volterra::BoundMode bound_mode = volterra::BoundMode::automatic;

  // deterministic solver
  Equation equation = Equation::moment_bound;
  double force = 1.0;               // renewal: constant force
  double kernel_coefficient = 1.0;  // renewal: multiplies g
  double gamma = 1.0;               // renewal: v^gamma inside the integral
  std::optional<double> grid_start;  // defaults to the interval start (or end - 20 on the whole line)
  std::optional<double> grid_end;    // defaults to the interval end (capped at 20)
  std::size_t grid_steps = 200;
  double tolerance = 1e-10;
  int max_iterations = 500;

  // simulation
  sim::SimConfig sim;
  double time = 1.0;
  double box_lo = -1.0;
  double box_hi = 1.0;
  std::size_t keep_paths = 1;
  Probe probe = Probe::moments;
  double node_t = 1.0;
  double node_x = 0.0;
  std::vector<sim::Shift> shifts;
  double offset_dt = 0.0;
  double offset_dx = 0.5;
  int offset_count = 4;
  bool unchecked = false;  // simulate even when the checker fails

  // reproduce-example
  std::string example;
  std::optional<double> lambda;
  std::optional<double> alpha;

  Expectation expect;
};

RunConfig build(const Table& table, const std::string& source);
RunConfig load(const std::string& path, const std::vector<std::string>& overrides = {});

// preset directory: LVX_PRESET_DIR from the environment, else the build-time default
std::string preset_dir();
// path of a named preset, or the argument itself when it names a file
std::string resolve_preset(const std::string& name_or_path);

}  // namespace lvx::config
