#include "quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>

namespace lvx::quad {

Result smooth(const Fn& f, double a, double b, double rel_tol) {
  if (!(b > a)) return {};
  Result r;
  double l1 = 0.0;
  r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol,
                                                                          &r.error, &l1);
  return r;
}

Result endpoint(const Fn& f, double a, double b, double rel_tol) {
  if (!(b > a)) return {};
  thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
  Result r;
  double l1 = 0.0;
  r.value = ts.integrate([&f](double x) { return f(x); }, a, b, rel_tol, &r.error, &l1);
  return r;
}

Result half_line(const Fn& f, double a, double rel_tol) {
  thread_local boost::math::quadrature::exp_sinh<double> es(12);
  Result r;
  double l1 = 0.0;
  r.value = es.integrate([&](double u) { return f(a + u); }, rel_tol, &r.error, &l1);
  return r;
}

double gauss20(const Fn& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

}  // namespace lvx::quad
