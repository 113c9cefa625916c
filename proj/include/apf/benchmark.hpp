#pragma once

#include <Eigen/Core>

#include <cstddef>

#include "apf/models.hpp"

namespace apf {

/// Closed-form posterior of sigma for i.i.d. Gaussian increments:
/// n * sigma_hat_sq / sigma^2 ~ chi-square(n - 1).
struct BenchmarkPosterior {
  double sigma_hat_sq = 0.0;  // mean of squared increments
  long n = 2;
};

/// Particle measure: locations and normalised weights.
struct WeightedSample {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;

  /// Throws std::invalid_argument on length mismatch, negative weights, or
  /// weights not summing to 1 within 1e-12 (1e-9 when `loose`).
  void validate(bool loose = false) const;
};

/// Uses increments 1..upto. Throws InsufficientDataError when upto < 2.
BenchmarkPosterior benchmark_from_series(const ObservationSeries& series, std::size_t upto);
BenchmarkPosterior benchmark_from_increments(const Eigen::Ref<const Eigen::VectorXd>& increments);

/// P(Sigma <= sigma) = 1 - F_chi2(n - 1)(n sigma_hat_sq / sigma^2).
double theoretical_cdf(const BenchmarkPosterior& bp, double sigma);

/// Weighted proportion of points <= sigma.
double empirical_cdf(const WeightedSample& sample, double sigma);

/// sup |F* - F|, evaluated exactly at the jumps of the empirical CDF.
double ks_statistic(const WeightedSample& sample, const BenchmarkPosterior& bp);

}  // namespace apf
