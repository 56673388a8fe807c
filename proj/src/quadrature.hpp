#pragma once

#include <functional>

namespace lvx::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

using Fn = std::function<double(double)>;

// adaptive Gauss-Kronrod on a smooth finite interval
Result smooth(const Fn& f, double a, double b, double rel_tol = 1e-12);
// tanh-sinh on a finite interval; tolerates integrable endpoint singularities
Result endpoint(const Fn& f, double a, double b, double rel_tol = 1e-12);
// exp-sinh on [a, infinity)
Result half_line(const Fn& f, double a, double rel_tol = 1e-12);
// fixed 20-point Gauss-Legendre rule, for inner loops of composite rules
double gauss20(const Fn& f, double a, double b);

}  // namespace lvx::quad
