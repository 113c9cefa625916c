#include "apf/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "apf/distributions.hpp"
#include "apf/errors.hpp"

namespace apf {

void WeightedSample::validate(bool loose) const {
  if (points.size() != weights.size()) throw std::invalid_argument("weighted sample: length mismatch");
  if ((weights.array() < 0.0).any()) throw std::invalid_argument("weighted sample: negative weight");
  const double total = weights.sum();
  if (std::abs(total - 1.0) > (loose ? 1e-9 : 1e-12)) {
    throw std::invalid_argument("weighted sample: weights sum to " + std::to_string(total));
  }
}

BenchmarkPosterior benchmark_from_series(const ObservationSeries& series, std::size_t upto) {
  if (upto < 2) throw InsufficientDataError("benchmark: need at least 2 observations");
  if (upto > series.steps()) throw std::invalid_argument("benchmark: upto exceeds series length");
  return benchmark_from_increments(series.increments.head(static_cast<Eigen::Index>(upto)));
}

BenchmarkPosterior benchmark_from_increments(const Eigen::Ref<const Eigen::VectorXd>& increments) {
  if (increments.size() < 2) throw InsufficientDataError("benchmark: need at least 2 observations");
  return {increments.squaredNorm() / static_cast<double>(increments.size()), static_cast<long>(increments.size())};
}

double theoretical_cdf(const BenchmarkPosterior& bp, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("theoretical_cdf: sigma must be positive");
  if (bp.n < 2) throw InsufficientDataError("theoretical_cdf: n must be >= 2");
  if (std::isinf(sigma)) return 1.0;
  const double statistic = static_cast<double>(bp.n) * bp.sigma_hat_sq / (sigma * sigma);
  return chi_square_sf(statistic, bp.n - 1);
}

double empirical_cdf(const WeightedSample& sample, double sigma) {
  double mass = 0.0;
  for (Eigen::Index i = 0; i < sample.points.size(); ++i) {
    if (sample.points[i] <= sigma) mass += sample.weights[i];
  }
  return std::clamp(mass, 0.0, 1.0);
}

double ks_statistic(const WeightedSample& sample, const BenchmarkPosterior& bp) {
  const Eigen::Index n = sample.points.size();
  if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
  if (sample.weights.size() != n) throw std::invalid_argument("ks_statistic: length mismatch");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return sample.points[a] < sample.points[b] || (sample.points[a] == sample.points[b] && a < b);
  });

  double below = 0.0;  // F*(x-)
  double sup = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double x = sample.points[order[k]];
    double at = below;
    while (k < order.size() && sample.points[order[k]] == x) at += sample.weights[order[k++]];
    at = std::min(at, 1.0);
    const double f = x > 0.0 ? theoretical_cdf(bp, x) : 0.0;
    sup = std::max({sup, std::abs(at - f), std::abs(below - f)});
    below = at;
  }
  return std::min(sup, 1.0);
}

}  // namespace apf
