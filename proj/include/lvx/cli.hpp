#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lvx::cli {

enum ExitCode : int { success = 0, usage_error = 1, check_failed = 2, numerical_failure = 3 };

struct Invocation {
  std::string command;  // check, volterra, simulate, stability, reproduce-example
  std::string config;   // file path, or a preset name for reproduce-example
  std::vector<std::string> overrides;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;  // reproduce-example ex4.1
  std::optional<double> alpha;
};

// runs one command, writes artifacts to out_dir (default ".") and returns the exit code
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

// argv front end
int main(int argc, char** argv);

}  // namespace lvx::cli
