#pragma once

namespace apf {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), evaluated
/// directly so the upper tail keeps full relative precision.
double gamma_q(double a, double x);

/// Chi-square CDF with `dof` degrees of freedom. Zero for x <= 0.
/// Throws std::invalid_argument when dof < 1.
double chi_square_cdf(double x, long dof);
/// Chi-square survival function 1 - chi_square_cdf(x, dof).
double chi_square_sf(double x, long dof);

}  // namespace apf
