#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "apf/models.hpp"

using namespace apf;

namespace {

ObservationSeries simulate(const ModelSpec& spec, std::size_t steps, std::uint64_t seed) {
  RngStream rng(seed);
  return generate(spec, steps, rng);
}

}  // namespace

TEST_CASE("transition_density values") {
  CHECK(transition_density(0.0, 1.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(transition_density(1.0, 1.0) == doctest::Approx(0.2419707245).epsilon(1e-10));
  CHECK(transition_density(0.0, 2.0) == doctest::Approx(0.1994711402).epsilon(1e-10));
  CHECK(transition_density(0.0f, 1.0f) == doctest::Approx(0.3989422804).epsilon(1e-6));
  CHECK_THROWS_AS(transition_density(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(transition_density(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("log_transition_density") {
  CHECK(log_transition_density(0.0, 1.0) == doctest::Approx(-0.9189385332).epsilon(1e-10));
  // Underflows in the linear domain.
  const double expected = -5000.0 - std::log(0.1 * std::sqrt(2.0 * std::numbers::pi));
  CHECK(std::abs(log_transition_density(10.0, 0.1) - expected) < 1e-9);
  CHECK(transition_density(10.0, 0.1) == 0.0);
  CHECK(std::exp(log_transition_density(1.0, 1.0)) == doctest::Approx(0.2419707245).epsilon(1e-10));
  for (double dx : {-3.0, -0.1, 0.0, 0.7, 2.5}) {
    for (double sigma : {0.05, 0.3, 1.0, 4.0}) {
      const double linear = transition_density(dx, sigma);
      if (linear < 1e-300) continue;  // underflow, covered above
      CHECK(std::abs(log_transition_density(dx, sigma) - std::log(linear)) < 1e-12);
    }
  }
  CHECK_THROWS_AS(log_transition_density(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("transition_density integrates to one") {
  for (double sigma : {0.01, 0.1, 1.0, 10.0}) {
    const int points = 100000;
    const double lo = -10.0 * sigma;
    const double step = 20.0 * sigma / (points - 1);
    double integral = 0.0;
    for (int i = 0; i < points; ++i) {
      const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
      integral += w * transition_density(lo + i * step, sigma);
    }
    integral *= step;
    CAPTURE(sigma);
    CHECK(std::abs(integral - 1.0) < 1e-8);
  }
}

TEST_CASE("generate: structure and determinism") {
  const auto a = simulate(GaussianModel{0.2}, 500, 3);
  const auto b = simulate(GaussianModel{0.2}, 500, 3);
  CHECK(a.values == b.values);
  CHECK(a.values.size() == 501);
  CHECK(a.steps() == 500);
  CHECK(a.values[0] == 0.0);
  REQUIRE(a.truth);
  CHECK(a.truth->size() == 500);
  for (Eigen::Index i = 0; i < 500; ++i) REQUIRE(a.increments[i] == a.values[i + 1] - a.values[i]);
  CHECK(simulate(GaussianModel{0.2}, 500, 4).values != a.values);
}

TEST_CASE("generate: vanishing volatility") {
  const auto s = simulate(GaussianModel{1e-12}, 10, 5);
  CHECK(s.increments.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("generate: Gaussian increments have the requested scale") {
  const auto s = simulate(GaussianModel{0.2}, 100000, 6);
  const double sd = std::sqrt(s.increments.squaredNorm() / 100000.0);
  // sd of the sample sd ~ 0.2 / sqrt(2n) ~ 4.5e-4
  CHECK(std::abs(sd - 0.2) < 0.002);
}

TEST_CASE("generate: regime shift switches at t_star") {
  const auto s = simulate(RegimeShiftModel{0.1, 0.3, 10000}, 20000, 7);
  REQUIRE(s.truth);
  const auto& truth = *s.truth;
  for (Eigen::Index i = 0; i < 20000; ++i) {
    const std::size_t t = static_cast<std::size_t>(i) + 1;
    REQUIRE(truth[i] == (t < 10000 ? 0.1 : 0.3));
  }
  const double before = std::sqrt(s.increments.head(9999).squaredNorm() / 9999.0);
  const double after = std::sqrt(s.increments.tail(10001).squaredNorm() / 10001.0);
  CHECK(std::abs(before - 0.1) < 0.003);
  CHECK(std::abs(after - 0.3) < 0.009);
}

TEST_CASE("generate: degenerate models reduce to the Gaussian path") {
  const auto gaussian = simulate(GaussianModel{0.15}, 2000, 8);
  const auto regime = simulate(RegimeShiftModel{0.15, 0.15, 700}, 2000, 8);
  const auto stochvol = simulate(StochVolModel{0.15, 0.0}, 2000, 8);
  CHECK(regime.values == gaussian.values);
  CHECK(stochvol.values == gaussian.values);
  CHECK(*stochvol.truth == *gaussian.truth);
}

TEST_CASE("generate: stochastic volatility stays positive and moves") {
  const auto s = simulate(StochVolModel{0.2, 0.01}, 5000, 9);
  REQUIRE(s.truth);
  CHECK((s.truth->array() >= 0.0).all());
  CHECK((*s.truth)[0] == 0.2);
  CHECK(s.truth->maxCoeff() > s.truth->minCoeff());
}

TEST_CASE("generate: invalid specs") {
  RngStream rng(1);
  CHECK_THROWS_AS(generate(GaussianModel{0.0}, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate(GaussianModel{-1.0}, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate(GaussianModel{1.0}, 0, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate(RegimeShiftModel{0.1, 0.3, 0}, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate(RegimeShiftModel{0.1, 0.3, 11}, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate(RegimeShiftModel{0.1, -0.3, 5}, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate(StochVolModel{0.0, 0.1}, 10, rng), std::invalid_argument);
  CHECK_THROWS_AS(generate(StochVolModel{0.2, -0.1}, 10, rng), std::invalid_argument);
}

TEST_CASE("series CSV round-trips bit-exactly") {
  const auto s = simulate(StochVolModel{0.2, 0.05}, 300, 10);
  std::stringstream buffer;
  write_series_csv(buffer, s);
  const std::string text = buffer.str();
  CHECK(text.rfind("t,x,dx,truth\n0,0,,\n1,", 0) == 0);

  const auto back = read_series_csv(buffer);
  CHECK(back.values == s.values);
  CHECK(back.increments == s.increments);
  REQUIRE(back.truth);
  CHECK(*back.truth == *s.truth);

  std::stringstream again;
  write_series_csv(again, back);
  CHECK(again.str() == text);
}

TEST_CASE("series CSV rejects malformed input") {
  std::stringstream bad_header("t,x\n0,0\n");
  CHECK_THROWS(read_series_csv(bad_header));
  std::stringstream bad_number("t,x,dx,truth\n0,0,,\n1,abc,0.1,\n");
  CHECK_THROWS(read_series_csv(bad_number));
  CHECK_THROWS(read_series_csv(std::string("/nonexistent/dir/series.csv")));
}
