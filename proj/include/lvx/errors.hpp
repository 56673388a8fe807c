#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lvx {

// Raised when an iterative scheme diverges or cannot contract. Carries the
// residual history so callers can serialize it.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::vector<double> residuals = {})
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lvx
