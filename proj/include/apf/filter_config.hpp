#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace apf {

enum class FilterVariant {
  Sis,              // weight update only
  Sir,              // + systematic resampling
  LiuWest,          // + shrinkage kernel
  LwFixedNoise,     // kernel variance h^2 V + phi_fixed
  LwSelectedNoise,  // per-particle phi ~ U(0, c), inherited through selection
  LwAccel,          // per-particle phi with log-normal perturbation
};

enum class InitScheme { RandomUniform, EqualSpaced };
enum class ResamplePolicy { EveryStep, Never };

struct FilterConfig {
  FilterVariant variant = FilterVariant::LiuWest;
  std::size_t n_particles = 1000;
  double prior_lo = 0.001;
  double prior_hi = 1.0;
  InitScheme init = InitScheme::EqualSpaced;
  double h = 0.1;
  double phi_fixed = 0.0;
  double phi_init_hi = 0.002;
  double gamma = 0.0;
  double kappa = 0.0;
  double sigma_floor = 1e-6;
  bool log_domain_weights = false;
  /// Unset means Never for SIS and EveryStep for everything else.
  std::optional<ResamplePolicy> resample_policy;
  std::uint64_t seed = 1;

  /// Edge-mass tracking costs a sort per step, so it is opt-in.
  bool track_edge_mass = false;
  double edge_quantile = 0.05;

  ResamplePolicy effective_resample_policy() const noexcept;
  bool uses_kernel() const noexcept;
  bool uses_phi() const noexcept;
  bool per_particle_phi() const noexcept;

  /// Throws std::invalid_argument on any inconsistent field.
  void validate() const;
};

std::string_view to_string(FilterVariant v);
std::string_view to_string(InitScheme s);
std::string_view to_string(ResamplePolicy p);
/// Accepts the lowercase names used by the CLI (e.g. "lw-accel"). Throws on unknown names.
FilterVariant parse_variant(std::string_view name);
InitScheme parse_init(std::string_view name);
ResamplePolicy parse_resample_policy(std::string_view name);

/// One-line `key=value` summary of every field.
std::string describe(const FilterConfig& config);

}  // namespace apf
