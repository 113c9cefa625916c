#include "apf/filter_config.hpp"

#include <array>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace apf {
namespace {

constexpr std::array<std::pair<FilterVariant, std::string_view>, 6> kVariantNames = {{
    {FilterVariant::Sis, "sis"},
    {FilterVariant::Sir, "sir"},
    {FilterVariant::LiuWest, "lw"},
    {FilterVariant::LwFixedNoise, "lw-fixed-noise"},
    {FilterVariant::LwSelectedNoise, "lw-selected-noise"},
    {FilterVariant::LwAccel, "lw-accel"},
}};

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("filter config: ") + what);
}

}  // namespace

ResamplePolicy FilterConfig::effective_resample_policy() const noexcept {
  if (resample_policy) return *resample_policy;
  return variant == FilterVariant::Sis ? ResamplePolicy::Never : ResamplePolicy::EveryStep;
}

bool FilterConfig::uses_kernel() const noexcept {
  return variant != FilterVariant::Sis && variant != FilterVariant::Sir;
}

bool FilterConfig::uses_phi() const noexcept {
  return variant == FilterVariant::LwFixedNoise || per_particle_phi();
}

bool FilterConfig::per_particle_phi() const noexcept {
  return variant == FilterVariant::LwSelectedNoise || variant == FilterVariant::LwAccel;
}

void FilterConfig::validate() const {
  require(n_particles >= 2, "n_particles must be >= 2");
  require(prior_lo >= 0.0, "prior_lo must be >= 0");
  require(prior_hi > prior_lo, "prior_hi must exceed prior_lo");
  require(h > 0.0 && h < 1.0, "h must lie in (0, 1)");
  require(sigma_floor > 0.0, "sigma_floor must be positive");
  require(phi_fixed >= 0.0, "phi_fixed must be >= 0");
  require(phi_init_hi > 0.0, "phi_init_hi must be positive");
  require(gamma >= 0.0, "gamma must be >= 0");
  require(kappa >= 0.0, "kappa must be >= 0");
  require(edge_quantile > 0.0 && edge_quantile < 0.5, "edge_quantile must lie in (0, 0.5)");
  require(!(uses_kernel() && effective_resample_policy() == ResamplePolicy::Never),
          "kernel variants need resample_policy=every-step");
}

std::string_view to_string(FilterVariant v) {
  for (const auto& [variant, name] : kVariantNames) {
    if (variant == v) return name;
  }
  return "?";
}

std::string_view to_string(InitScheme s) { return s == InitScheme::EqualSpaced ? "equal-spaced" : "random"; }

std::string_view to_string(ResamplePolicy p) { return p == ResamplePolicy::EveryStep ? "every-step" : "never"; }

FilterVariant parse_variant(std::string_view name) {
  for (const auto& [variant, known] : kVariantNames) {
    if (known == name) return variant;
  }
  throw std::invalid_argument("unknown filter variant '" + std::string(name) +
                              "' (sis, sir, lw, lw-fixed-noise, lw-selected-noise, lw-accel)");
}

InitScheme parse_init(std::string_view name) {
  if (name == "equal-spaced" || name == "equal") return InitScheme::EqualSpaced;
  if (name == "random") return InitScheme::RandomUniform;
  throw std::invalid_argument("unknown init scheme '" + std::string(name) + "' (equal-spaced, random)");
}

ResamplePolicy parse_resample_policy(std::string_view name) {
  if (name == "every-step") return ResamplePolicy::EveryStep;
  if (name == "never") return ResamplePolicy::Never;
  throw std::invalid_argument("unknown resample policy '" + std::string(name) + "' (every-step, never)");
}

std::string describe(const FilterConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "variant=" << to_string(c.variant) << " n=" << c.n_particles << " prior=[" << c.prior_lo << ','
     << c.prior_hi << ") init=" << to_string(c.init) << " h=" << c.h << " phi_fixed=" << c.phi_fixed
     << " phi_init_hi=" << c.phi_init_hi << " gamma=" << c.gamma << " kappa=" << c.kappa
     << " sigma_floor=" << c.sigma_floor << " log_weights=" << (c.log_domain_weights ? 1 : 0)
     << " resample=" << to_string(c.effective_resample_policy()) << " seed=" << c.seed;
  return os.str();
}

}  // namespace apf
