#include "batchgap/core/special.hpp"

#include <cmath>
#include <numbers>

namespace batchgap {
namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

double erf_series(double x) {
  const double two_x2 = 2.0 * x * x;
  double term = x;
  double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= two_x2 / (2.0 * n + 1.0);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return kTwoOverSqrtPi * std::exp(-x * x) * sum;
}

// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x > 0.
double erfc_continued_fraction(double x) {
  constexpr double kTiny = 1e-300;
  double f = x;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 500; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = kTiny;
    d = 1.0 / d;
    c = x + a / c;
    if (c == 0.0) c = kTiny;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x * x) * std::numbers::inv_sqrtpi / f;
}

}  // namespace

double erf(double x) {
  const double ax = std::fabs(x);
  double r;
  if (ax < 2.0) {
    r = erf_series(ax);
  } else if (ax < 6.0) {
    r = 1.0 - erfc_continued_fraction(ax);
  } else {
    r = 1.0;
  }
  if (r > 1.0) r = 1.0;
  return std::signbit(x) ? -r : r;
}

}  // namespace batchgap
