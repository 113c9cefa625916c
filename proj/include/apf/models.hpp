#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "apf/rng.hpp"

namespace apf {

/// dx_t = sigma dW_t with unit time step.
struct GaussianModel {
  double sigma = 0.2;
};

/// Volatility sigma1 before step t_star, sigma2 from t_star on.
struct RegimeShiftModel {
  double sigma1 = 0.1;
  double sigma2 = 0.3;
  std::size_t t_star = 10000;
};

/// dx_t = alpha_t dW1, d alpha_t = nu dW2, alpha reflected at zero.
struct StochVolModel {
  double alpha0 = 0.2;
  double nu = 0.1;
};

using ModelSpec = std::variant<GaussianModel, RegimeShiftModel, StochVolModel>;

/// Throws std::invalid_argument when the spec cannot generate `steps` increments.
void validate(const ModelSpec& spec, std::size_t steps);
std::string describe(const ModelSpec& spec);
inline bool is_gaussian(const ModelSpec& spec) { return std::holds_alternative<GaussianModel>(spec); }

/// Directly observed path x_0..x_T. `increments(t-1)` is x_t - x_{t-1}.
struct ObservationSeries {
  Eigen::VectorXd values;
  Eigen::VectorXd increments;
  std::optional<Eigen::VectorXd> truth;  // per-increment volatility

  std::size_t steps() const noexcept { return static_cast<std::size_t>(increments.size()); }
};

/// Euler-Maruyama path for `spec`. x_0 = 0.
///
/// The observation noise comes from `rng`; the stochastic-volatility driver
/// uses `rng.fork(1)`, so nu = 0 reproduces the Gaussian path bit for bit.
ObservationSeries generate(const ModelSpec& spec, std::size_t steps, RngStream& rng);

/// Builds a series from increments alone (x_0 = 0, x_t = cumulative sum).
ObservationSeries series_from_increments(const Eigen::Ref<const Eigen::VectorXd>& increments);

/// Gaussian transition density N(dx; 0, sigma^2).
template <typename Scalar>
Scalar transition_density(Scalar dx, Scalar sigma) {
  if (!(sigma > Scalar(0))) throw std::invalid_argument("transition_density: sigma must be positive");
  const Scalar z = dx / sigma;
  return std::exp(Scalar(-0.5) * z * z) / (sigma * std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>));
}

template <typename Scalar>
Scalar log_transition_density(Scalar dx, Scalar sigma) {
  if (!(sigma > Scalar(0))) throw std::invalid_argument("log_transition_density: sigma must be positive");
  const Scalar z = dx / sigma;
  return Scalar(-0.5) * z * z - std::log(sigma) - Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// CSV with header `t,x,dx,truth`; row t = 0 carries x_0 with empty dx/truth.
void write_series_csv(std::ostream& out, const ObservationSeries& series);
void write_series_csv(const std::string& path, const ObservationSeries& series);
/// Throws std::runtime_error on malformed input.
ObservationSeries read_series_csv(std::istream& in);
ObservationSeries read_series_csv(const std::string& path);

}  // namespace apf
