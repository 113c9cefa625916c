#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace apf {

/// N particles over a scalar volatility parameter.
///
/// `weights` always holds linear weights; in log-domain mode `log_weights`
/// carries the accumulated (unnormalised) log weights and `weights` is
/// refreshed by normalise(). `phis` is empty for variants without
/// per-particle kernel noise. `dispersion` holds |delta sigma| from the most
/// recent kernel step and travels with particles through resampling.
template <typename Scalar>
struct ParticleEnsemble {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Array sigmas;
  Array weights;
  Array log_weights;
  Array phis;
  Array dispersion;
  bool log_domain = false;

  Eigen::Index size() const noexcept { return sigmas.size(); }
  bool has_phi() const noexcept { return phis.size() > 0; }
};

using Ensemble = ParticleEnsemble<double>;

}  // namespace apf
