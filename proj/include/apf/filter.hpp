#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "apf/diagnostics.hpp"
#include "apf/ensemble.hpp"
#include "apf/errors.hpp"
#include "apf/filter_config.hpp"
#include "apf/models.hpp"
#include "apf/rng.hpp"

namespace apf {

/// One independent stream per source of randomness, so that variants which
/// skip a stage (or draw extra phi noise) leave the others untouched.
struct FilterStreams {
  RngStream init;
  RngStream resample;
  RngStream kernel;
  RngStream phi;

  explicit FilterStreams(std::uint64_t seed)
      : init(seed, 1), resample(seed, 2), kernel(seed, 3), phi(seed, 4) {}
};

/// Shrinkage kernel for an equally weighted ensemble.
template <typename Scalar>
struct KernelParams {
  typename ParticleEnsemble<Scalar>::Array means;
  Scalar base_variance;  // h^2 V
  Scalar mean;
  Scalar variance;  // V
  Scalar shrink;    // c = sqrt(1 - h^2)
};

/// Initial ensemble: equal spacing a + (b - a) i / N for i = 1..N, or
/// i.i.d. U(a, b); weights 1/N; phis per variant. Locations are floored at
/// `sigma_floor` so a zero prior bound never yields sigma = 0.
template <typename Scalar = double>
ParticleEnsemble<Scalar> init_ensemble(const FilterConfig& config, FilterStreams& streams) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(config.n_particles);
  ParticleEnsemble<Scalar> ens;
  ens.sigmas.resize(n);
  const double a = config.prior_lo;
  const double b = config.prior_hi;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sigma = config.init == InitScheme::EqualSpaced
                             ? a + (b - a) * static_cast<double>(i + 1) / static_cast<double>(n)
                             : draw_uniform(streams.init, a, b);
    ens.sigmas[i] = static_cast<Scalar>(std::max(sigma, config.sigma_floor));
  }
  ens.weights.setConstant(n, Scalar(1) / static_cast<Scalar>(n));
  ens.log_domain = config.log_domain_weights;
  if (ens.log_domain) ens.log_weights = ens.weights.log();
  ens.dispersion.setZero(n);
  if (config.per_particle_phi()) {
    ens.phis.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      ens.phis[i] = static_cast<Scalar>(draw_uniform(streams.phi, 0.0, config.phi_init_hi));
    }
  } else if (config.variant == FilterVariant::LwFixedNoise) {
    ens.phis.setConstant(n, static_cast<Scalar>(config.phi_fixed));
  }
  return ens;
}

/// Multiplies each weight by the transition density of `dx` (adds the log
/// density in log-domain mode). The result is unnormalised.
template <typename Scalar>
void update_weights(ParticleEnsemble<Scalar>& ens, Scalar dx) {
  if (ens.log_domain) {
    for (Eigen::Index i = 0; i < ens.size(); ++i) ens.log_weights[i] += log_transition_density(dx, ens.sigmas[i]);
  } else {
    for (Eigen::Index i = 0; i < ens.size(); ++i) ens.weights[i] *= transition_density(dx, ens.sigmas[i]);
  }
}

/// Rescales weights to sum to one. Throws DegenerateWeightsError when no
/// weight survives.
template <typename Scalar>
void normalise(ParticleEnsemble<Scalar>& ens) {
  if (ens.log_domain) {
    const Scalar top = ens.log_weights.maxCoeff();
    if (!std::isfinite(top)) throw DegenerateWeightsError("all log-weights are -inf or not finite");
    ens.weights = (ens.log_weights - top).exp();
    const Scalar total = ens.weights.sum();
    ens.weights /= total;
    ens.log_weights = ens.log_weights - top - std::log(total);
    return;
  }
  const Scalar total = ens.weights.sum();
  if (!(total > Scalar(0)) || !std::isfinite(total)) {
    throw DegenerateWeightsError("total particle weight is zero");
  }
  ens.weights /= total;
}

/// Weighted posterior mean and variance of the particle locations.
template <typename Scalar>
std::pair<Scalar, Scalar> posterior_moments(const ParticleEnsemble<Scalar>& ens) {
  const Scalar mean = (ens.weights * ens.sigmas).sum();
  const Scalar variance = (ens.weights * (ens.sigmas - mean).square()).sum();
  return {mean, variance};
}

/// Systematic resampling indices: u_k = (k + u_tilde) / N picks the particle
/// whose cumulative-weight interval [W_{i-1}, W_i) contains u_k.
template <typename Derived>
std::vector<Eigen::Index> systematic_offspring(const Eigen::DenseBase<Derived>& weights, double u_tilde) {
  const Eigen::Index n = weights.size();
  if (n == 0) return {};
  if (!(u_tilde >= 0.0 && u_tilde < 1.0)) throw std::invalid_argument("systematic_offspring: u_tilde not in [0, 1)");
  Eigen::Index last_positive = n - 1;
  while (last_positive > 0 && !(weights[last_positive] > 0)) --last_positive;

  // Compared in units of 1/N (k + u_tilde against N W_i), so equal weights
  // accumulate to exact integers.
  const auto scale = static_cast<double>(n);
  std::vector<Eigen::Index> parents(static_cast<std::size_t>(n));
  Eigen::Index i = 0;
  double cumulative = scale * static_cast<double>(weights[0]);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double u = static_cast<double>(k) + u_tilde;
    while (u >= cumulative && i < last_positive) cumulative += scale * static_cast<double>(weights[++i]);
    parents[static_cast<std::size_t>(k)] = i;
  }
  return parents;
}

/// Copies parents into a new equally weighted ensemble. Phis and
/// dispersions travel with their particles.
template <typename Scalar>
void apply_offspring(ParticleEnsemble<Scalar>& ens, const std::vector<Eigen::Index>& parents) {
  const auto n = static_cast<Eigen::Index>(parents.size());
  typename ParticleEnsemble<Scalar>::Array sigmas(n), dispersion(n), phis(ens.has_phi() ? n : 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index parent = parents[static_cast<std::size_t>(k)];
    sigmas[k] = ens.sigmas[parent];
    dispersion[k] = ens.dispersion[parent];
    if (ens.has_phi()) phis[k] = ens.phis[parent];
  }
  ens.sigmas = std::move(sigmas);
  ens.dispersion = std::move(dispersion);
  ens.phis = std::move(phis);
  ens.weights.setConstant(n, Scalar(1) / static_cast<Scalar>(n));
  if (ens.log_domain) ens.log_weights = ens.weights.log();
}

template <typename Scalar>
void systematic_resample(ParticleEnsemble<Scalar>& ens, double u_tilde) {
  apply_offspring(ens, systematic_offspring(ens.weights, u_tilde));
}

template <typename Scalar>
void systematic_resample(ParticleEnsemble<Scalar>& ens, RngStream& rng) {
  systematic_resample(ens, rng.next_unit());
}

/// Liu-West kernel: m_i = c sigma_i + (1 - c) mean, variance h^2 V with V
/// the (equal-weight) ensemble variance.
template <typename Scalar>
KernelParams<Scalar> lw_kernel_params(const ParticleEnsemble<Scalar>& ens, Scalar h) {
  if (!(h >= Scalar(0) && h < Scalar(1))) throw std::invalid_argument("lw_kernel_params: h must lie in [0, 1)");
  KernelParams<Scalar> k;
  k.shrink = std::sqrt(Scalar(1) - h * h);
  k.mean = ens.sigmas.mean();
  k.variance = (ens.sigmas - k.mean).square().mean();
  k.means = k.shrink * ens.sigmas + (Scalar(1) - k.shrink) * k.mean;
  k.base_variance = h * h * k.variance;
  return k;
}

/// Redraws every particle from N(m_i, h^2 V + phi_i) (phi_i = 0 without
/// phis) and records |delta sigma|. Draws below `sigma_floor` are retried up
/// to 8 times, then clamped.
template <typename Scalar>
void kernel_smooth(ParticleEnsemble<Scalar>& ens, Scalar h, RngStream& rng, Scalar sigma_floor) {
  constexpr int kRedraws = 8;
  const KernelParams<Scalar> k = lw_kernel_params(ens, h);
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    const Scalar variance = ens.has_phi() ? k.base_variance + ens.phis[i] : k.base_variance;
    auto draw = [&] { return static_cast<Scalar>(draw_normal(rng, k.means[i], variance)); };
    Scalar next = draw();
    for (int attempt = 0; attempt < kRedraws && next < sigma_floor; ++attempt) next = draw();
    next = std::max(next, sigma_floor);
    ens.dispersion[i] = std::abs(next - ens.sigmas[i]);
    ens.sigmas[i] = next;
  }
}

/// phi_i <- phi_i * exp(delta), delta ~ N(-kappa, gamma). Zero stays zero.
template <typename Scalar>
void perturb_phi(ParticleEnsemble<Scalar>& ens, Scalar gamma, Scalar kappa, RngStream& rng) {
  if (!ens.has_phi()) throw NotApplicableError("perturb_phi: ensemble carries no noise parameter");
  for (Eigen::Index i = 0; i < ens.size(); ++i) {
    const double log_factor = draw_normal(rng, -static_cast<double>(kappa), static_cast<double>(gamma));
    ens.phis[i] *= static_cast<Scalar>(std::exp(log_factor));
  }
}

/// Per-step outputs. Optional fields are absent where the variant or
/// weight mode does not define them.
template <typename Scalar>
struct StepResult {
  std::size_t t = 0;
  Scalar posterior_mean{};
  Scalar posterior_variance{};
  std::optional<double> zero_weight_prop;
  std::optional<EdgeMass> edge;
  std::optional<double> dispersion_total;
  std::optional<double> avg_phi;
};

/// Called with the normalised, weighted posterior before resampling.
template <typename Scalar>
using PosteriorObserver = std::function<void(std::size_t t, const ParticleEnsemble<Scalar>&)>;

/// One observation through the variant's pipeline:
///   update -> normalise [-> resample [-> perturb phi] -> kernel smooth].
/// Mutates `ens` in place. Throws DegenerateWeightsError from normalise.
template <typename Scalar>
StepResult<Scalar> step(ParticleEnsemble<Scalar>& ens, Scalar dx, const FilterConfig& config,
                        FilterStreams& streams, std::size_t t = 0,
                        const PosteriorObserver<Scalar>& observer = {}) {
  StepResult<Scalar> result;
  result.t = t;

  typename ParticleEnsemble<Scalar>::Array pre_weights;
  if (config.track_edge_mass) pre_weights = ens.weights;

  update_weights(ens, dx);
  normalise(ens);

  std::tie(result.posterior_mean, result.posterior_variance) = posterior_moments(ens);
  if (!ens.log_domain) result.zero_weight_prop = zero_weight_proportion(ens);
  if (config.track_edge_mass) result.edge = edge_mass(ens.sigmas, pre_weights, ens.weights, config.edge_quantile);
  if (observer) observer(t, ens);

  if (config.effective_resample_policy() == ResamplePolicy::EveryStep) {
    systematic_resample(ens, streams.resample);
    if (config.uses_kernel()) result.dispersion_total = realized_dispersion_total(ens);
    if (config.variant == FilterVariant::LwAccel) {
      perturb_phi(ens, static_cast<Scalar>(config.gamma), static_cast<Scalar>(config.kappa), streams.phi);
    }
    if (config.uses_kernel()) {
      kernel_smooth(ens, static_cast<Scalar>(config.h), streams.kernel, static_cast<Scalar>(config.sigma_floor));
    }
  }
  if (ens.has_phi()) result.avg_phi = average_phi(ens);
  return result;
}

struct RunFailure {
  std::size_t t = 0;  // 1-based step that failed
  std::string reason;
};

template <typename Scalar>
struct RunResult {
  std::vector<StepResult<Scalar>> steps;
  ParticleEnsemble<Scalar> final_ensemble;
  std::optional<RunFailure> failure;

  bool ok() const noexcept { return !failure; }
};

/// Initialises from `config` and filters every increment of `series`.
/// A degenerate-weights step stops the run; the steps completed so far are
/// kept and `failure` names the step. Throws std::invalid_argument for an
/// empty series or invalid config.
template <typename Scalar = double>
RunResult<Scalar> run(const ObservationSeries& series, const FilterConfig& config,
                      const PosteriorObserver<Scalar>& observer = {}) {
  if (series.steps() == 0) throw std::invalid_argument("run: series has no increments");
  FilterStreams streams(config.seed);
  RunResult<Scalar> out;
  out.final_ensemble = init_ensemble<Scalar>(config, streams);
  out.steps.reserve(series.steps());
  for (std::size_t t = 1; t <= series.steps(); ++t) {
    const auto dx = static_cast<Scalar>(series.increments[static_cast<Eigen::Index>(t - 1)]);
    try {
      out.steps.push_back(step(out.final_ensemble, dx, config, streams, t, observer));
    } catch (const DegenerateWeightsError& e) {
      out.failure = RunFailure{t, e.what()};
      break;
    }
  }
  return out;
}

/// Snapshot of an ensemble's weighted measure.
template <typename Scalar>
WeightedSample weighted_sample(const ParticleEnsemble<Scalar>& ens) {
  return {ens.sigmas.template cast<double>().matrix(), ens.weights.template cast<double>().matrix()};
}

}  // namespace apf
