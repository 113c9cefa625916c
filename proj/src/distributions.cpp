#include "apf/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace apf {
namespace {

constexpr double kTolerance = 1e-15;
constexpr int kMaxIterations = 1'000'000;

// log(1 + d) - d without cancellation for small |d|.
double log1pmx(double d) {
  if (std::abs(d) > 0.25) return std::log1p(d) - d;
  // -d^2/2 + d^3/3 - ...
  double term = d;
  double sum = 0.0;
  for (int k = 2; k < 200; ++k) {
    term *= -d;
    const double contribution = term / k;
    sum += contribution;
    if (std::abs(contribution) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// lgamma(a) - ((a - 1/2) log a - a + log(2 pi) / 2), a >= 10.
double stirling_remainder(double a) {
  const double inv = 1.0 / a;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 - inv2 / 1188))));
}

// log(x^a e^-x / Gamma(a)).
double log_gamma_prefix(double a, double x) {
  if (a < 10.0) return a * std::log(x) - x - std::lgamma(a);
  const double d = (x - a) / a;
  return a * log1pmx(d) + 0.5 * std::log(a / (2.0 * std::numbers::pi)) - stirling_remainder(a);
}

// Series for P(a, x); converges quickly for x < a + 1.
double lower_series(double a, double x) {
  double denom = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    denom += 1.0;
    term *= x / denom;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kTolerance) break;
  }
  return sum * std::exp(log_gamma_prefix(a, x));
}

// Lentz continued fraction for Q(a, x); converges quickly for x >= a + 1.
double upper_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kTolerance) break;
  }
  return std::exp(log_gamma_prefix(a, x)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("incomplete gamma: shape must be positive");
  if (std::isnan(x)) throw std::invalid_argument("incomplete gamma: x is NaN");
}

long checked_dof(long dof) {
  if (dof < 1) throw std::invalid_argument("chi-square: degrees of freedom must be >= 1");
  return dof;
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, lower_series(a, x));
  return 1.0 - std::min(1.0, upper_fraction(a, x));
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - std::min(1.0, lower_series(a, x));
  return std::min(1.0, upper_fraction(a, x));
}

double chi_square_cdf(double x, long dof) {
  const double k = static_cast<double>(checked_dof(dof));
  if (!(x > 0.0)) return 0.0;
  return gamma_p(0.5 * k, 0.5 * x);
}

double chi_square_sf(double x, long dof) {
  const double k = static_cast<double>(checked_dof(dof));
  if (!(x > 0.0)) return 1.0;
  return gamma_q(0.5 * k, 0.5 * x);
}

}  // namespace apf
