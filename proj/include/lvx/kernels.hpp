#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lvx::kernels {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Heat {
  double damping;  // a
  int dimension;   // d
};

struct Exponential {
  double decay;  // lambda; spatial dimension is 0
};

// radially symmetric samples g(t, r) on a rectangular (t, r) grid,
// bilinear in between and zero outside
struct Tabulated {
  std::vector<double> times;
  std::vector<double> radii;
  std::vector<double> values;  // row-major, values[i * radii.size() + j]
  int dimension;
};

class Kernel {
 public:
  using Family = std::variant<Heat, Exponential, Tabulated>;

  explicit Kernel(Family family);
  static Kernel heat(double a, int d) { return Kernel(Heat{a, d}); }
  static Kernel exponential(double lambda) { return Kernel(Exponential{lambda}); }
  // CSV rows of (t, |x|, value); header line optional
  static Kernel from_csv(const std::string& path, int dimension);

  const Family& family() const { return family_; }
  int dimension() const;
  std::string describe() const;
  bool is_heat() const { return std::holds_alternative<Heat>(family_); }
  bool is_tabulated() const { return std::holds_alternative<Tabulated>(family_); }

  double operator()(double t, std::span<const double> x) const;
  double radial(double t, double r) const;  // g(t, x) with |x| = r
  // int_{R^d} phi(g(t, x)) dx
  double spatial_transform(double t, const std::function<double(double)>& phi) const;
  // int_{R^d} g(t, x)^r dx, closed form where available
  double spatial_power(double t, double r) const;
  // average over the box [lo, hi] (offsets x - y) of g(t, .)^r
  double box_average_power(double t, std::span<const double> lo, std::span<const double> hi,
                           double r) const;

 private:
  Family family_;
};

enum class NormMethod { closed_form, quadrature };

struct KernelNorm {
  double value = 0.0;
  NormMethod method = NormMethod::closed_form;
  double estimated_error = 0.0;
  bool finite() const { return value < kInfinity; }
};

double evaluate(const Kernel& k, double t, std::span<const double> x);

// int_0^H int g^p
KernelNorm lp_norm(const Kernel& k, double p, double horizon,
                   NormMethod preferred = NormMethod::closed_form);
// int_0^H int |g|^p_q e^{-eta t}: exponent p where g > 1, q where g <= 1
KernelNorm truncated_lp_norm(const Kernel& k, double p, double q, double horizon, double eta = 0.0);
// int_0^inf int g^p e^{-eta t}, heat family only
KernelNorm weighted_lp_norm(const Kernel& k, double p, double eta,
                            NormMethod preferred = NormMethod::closed_form);
// int_0^H int phi(g) e^{-eta t}; phi must vanish at 0. For heat kernels,
// singular_exponent c declares that the spatial integral behaves like t^c
// near t = 0, which selects a regularizing substitution.
KernelNorm transform_norm(const Kernel& k, const std::function<double(double)>& phi, double horizon,
                          double eta = 0.0, std::optional<double> singular_exponent = std::nullopt);

// local integrability int_0^T int g^p < inf for finite T > 0
bool locally_p_integrable(const Kernel& k, double p);

}  // namespace lvx::kernels
