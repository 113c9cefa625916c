#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "apf/benchmark.hpp"
#include "apf/distributions.hpp"
#include "apf/errors.hpp"
#include "oracles.hpp"

using namespace apf;

namespace {

WeightedSample sample(std::initializer_list<double> points, std::initializer_list<double> weights) {
  WeightedSample s;
  s.points = Eigen::VectorXd::Map(points.begin(), static_cast<Eigen::Index>(points.size()));
  s.weights = Eigen::VectorXd::Map(weights.begin(), static_cast<Eigen::Index>(weights.size()));
  return s;
}

}  // namespace

TEST_CASE("benchmark_from_series") {
  SUBCASE("all-zero increments") {
    const auto bp = benchmark_from_increments(Eigen::VectorXd::Zero(10));
    CHECK(bp.sigma_hat_sq == 0.0);
    CHECK(bp.n == 10);
  }
  SUBCASE("alternating unit increments") {
    Eigen::VectorXd dx(4);
    dx << 1, -1, 1, -1;
    const auto bp = benchmark_from_series(series_from_increments(dx), 4);
    CHECK(bp.sigma_hat_sq == 1.0);
    CHECK(bp.n == 4);
  }
  SUBCASE("prefix only") {
    Eigen::VectorXd dx(4);
    dx << 1, 3, 100, 100;
    const auto bp = benchmark_from_series(series_from_increments(dx), 2);
    CHECK(bp.sigma_hat_sq == 5.0);
    CHECK(bp.n == 2);
  }
  SUBCASE("too little data") {
    CHECK_THROWS_AS(benchmark_from_series(series_from_increments(Eigen::VectorXd::Ones(4)), 1),
                    InsufficientDataError);
    CHECK_THROWS_AS(benchmark_from_increments(Eigen::VectorXd::Ones(1)), InsufficientDataError);
  }
}

TEST_CASE("theoretical_cdf limits, errors and monotonicity") {
  const BenchmarkPosterior bp{0.04, 100};
  CHECK(theoretical_cdf(bp, 1e-9) == 0.0);
  CHECK(theoretical_cdf(bp, std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(theoretical_cdf(bp, 1e6) == doctest::Approx(1.0));
  CHECK_THROWS_AS(theoretical_cdf(bp, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(theoretical_cdf(bp, -1.0), std::invalid_argument);

  for (long n : {2L, 10L, 100L, 10000L}) {
    const BenchmarkPosterior b{0.04, n};
    double previous = 0.0;
    for (int i = 1; i <= 10000; ++i) {
      const double value = theoretical_cdf(b, 0.0001 * i);
      REQUIRE(value >= previous);
      previous = value;
    }
  }
}

TEST_CASE("theoretical_cdf at (n=5, s2=1, sigma=1) against the Monte-Carlo oracle") {
  const BenchmarkPosterior bp{1.0, 5};
  CHECK(theoretical_cdf(bp, 1.0) == doctest::Approx(1.0 - chi_square_cdf(5.0, 4)).epsilon(1e-14));

  // X = sum of four squared standard normals; Sigma = sqrt(5 / X).
  RngStream rng(99);
  const int draws = 1'000'000;
  int below = 0;
  for (int i = 0; i < draws; ++i) {
    double x = 0.0;
    for (int k = 0; k < 4; ++k) {
      const double z = rng.next_standard_normal();
      x += z * z;
    }
    below += std::sqrt(5.0 / x) <= 1.0;
  }
  CHECK(std::abs(theoretical_cdf(bp, 1.0) - static_cast<double>(below) / draws) < 0.002);
}

TEST_CASE("theoretical_cdf matches Monte-Carlo posterior draws") {
  RngStream rng(5);
  for (const auto& bp : {BenchmarkPosterior{0.04, 3}, BenchmarkPosterior{1.7, 40}, BenchmarkPosterior{0.01, 2000}}) {
    const auto draws = oracle::posterior_sigma_draws(bp, 400000, rng);
    CHECK(oracle::sup_distance_to_draws(draws, [&](double s) { return theoretical_cdf(bp, s); }) < 0.005);
  }
}

TEST_CASE("empirical_cdf") {
  const auto s = sample({1.0, 2.0, 3.0}, {0.2, 0.3, 0.5});
  CHECK(empirical_cdf(s, 0.5) == 0.0);
  CHECK(empirical_cdf(s, 3.5) == 1.0);
  CHECK(empirical_cdf(s, 2.0) == doctest::Approx(0.5));
  CHECK(empirical_cdf(s, 1.999) == doctest::Approx(0.2));
  double previous = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double v = empirical_cdf(s, 0.01 * i);
    REQUIRE(v >= previous);
    previous = v;
  }
}

TEST_CASE("ks_statistic") {
  const BenchmarkPosterior bp{0.04, 50};

  SUBCASE("empty sample") { CHECK_THROWS_AS(ks_statistic(WeightedSample{}, bp), std::invalid_argument); }

  SUBCASE("single point at the median gives 0.5") {
    double lo = 0.01, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (theoretical_cdf(bp, mid) < 0.5 ? lo : hi) = mid;
    }
    CHECK(ks_statistic(sample({lo}, {1.0}), bp) == doctest::Approx(0.5).epsilon(1e-9));
  }

  SUBCASE("single point: max(F, 1 - F)") {
    for (double x : {0.15, 0.2, 0.25}) {
      const double f = theoretical_cdf(bp, x);
      CHECK(ks_statistic(sample({x}, {1.0}), bp) == doctest::Approx(std::max(f, 1.0 - f)));
    }
  }

  SUBCASE("single point deep in the upper tail approaches 1") {
    CHECK(ks_statistic(sample({5.0}, {1.0}), bp) > 1.0 - 1e-12);
  }

  SUBCASE("grid sample weighted by F increments") {
    const int points = 2000;
    WeightedSample s;
    s.points.resize(points);
    s.weights.resize(points);
    double previous = 0.0;
    for (int i = 0; i < points; ++i) {
      const double x = 0.1 + 0.2 * (i + 1) / points;
      const double f = theoretical_cdf(bp, x);
      s.points[i] = x;
      s.weights[i] = f - previous;
      previous = f;
    }
    s.weights[points - 1] += 1.0 - previous;
    CHECK(ks_statistic(s, bp) < 0.01);
  }

  SUBCASE("agrees with a brute-force scan, ties included") {
    RngStream rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 3 + trial;
      WeightedSample s;
      s.points.resize(n);
      s.weights.resize(n);
      for (int i = 0; i < n; ++i) {
        s.points[i] = std::round(draw_uniform(rng, 0.1, 0.35) * 200.0) / 200.0;  // forces ties
        s.weights[i] = draw_uniform(rng, 0.0, 1.0);
      }
      s.weights /= s.weights.sum();
      const double exact = ks_statistic(s, bp);
      const double scan = oracle::ks_by_scan(s, bp);
      CHECK(exact >= scan - 1e-12);
      CHECK(exact == doctest::Approx(scan).epsilon(1e-9));
      CHECK(exact >= 0.0);
      CHECK(exact <= 1.0);
    }
  }
}

TEST_CASE("WeightedSample::validate") {
  CHECK_NOTHROW(sample({1, 2}, {0.5, 0.5}).validate());
  CHECK_THROWS_AS(sample({1, 2}, {0.5, 0.6}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(sample({1, 2}, {1.5, -0.5}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(sample({1, 2, 3}, {0.5, 0.5}).validate(), std::invalid_argument);
}
