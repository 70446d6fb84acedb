#pragma once

#include "hypolab/problem.hpp"

#include <cmath>
#include <functional>

namespace testutil {

// Composite midpoint rule on [a, b].
inline double midpoint(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0;
  for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * h);
  return s * h;
}

// Composite Simpson rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// <e^{V/beta}> <e^{-V/beta}> for V = cos(2 pi r), by a 1e4-point midpoint rule.
inline double lifson_jackson_product(double beta = 1.0) {
  const double tp = 2.0 * 3.14159265358979323846;
  auto f = [&](double s) { return [=](double r) { return std::exp(s * std::cos(tp * r) / beta); }; };
  return midpoint(f(1.0), 0, 1, 10000) * midpoint(f(-1.0), 0, 1, 10000);
}

inline hypolab::Vec vec(std::initializer_list<double> v) {
  hypolab::Vec out(static_cast<long>(v.size()));
  long i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace testutil
