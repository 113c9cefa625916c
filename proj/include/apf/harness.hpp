#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apf/filter.hpp"
#include "apf/filter_config.hpp"
#include "apf/models.hpp"

namespace apf {

enum class Output { Posterior, Ks, ZeroWeight, EdgeMass, Dispersion, AvgPhi };

/// Flat `key = value` settings. Later sources override earlier ones.
using Settings = std::map<std::string, std::string>;

struct ExperimentPlan {
  ModelSpec model = GaussianModel{};
  std::size_t steps = 1000;
  std::uint64_t data_seed = 1;
  FilterConfig filter;
  std::size_t record_every = 1;
  std::set<Output> outputs = {Output::Posterior, Output::Ks,         Output::ZeroWeight,
                              Output::EdgeMass,  Output::Dispersion, Output::AvgPhi};
  std::optional<std::string> preset_name;

  bool wants(Output o) const { return outputs.contains(o); }
  /// Throws std::invalid_argument. KS output requires the Gaussian model.
  void validate() const;
  /// The run manifest line printed by the CLI.
  std::string manifest() const;
};

/// One CSV row of per-step measurements.
struct DiagnosticsRecord {
  std::size_t t = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> ks;
  std::optional<double> zero_weight_prop;
  std::optional<double> edge_mass_lo;
  std::optional<double> edge_mass_hi;
  std::optional<double> dispersion;
  std::optional<double> avg_phi;
};

struct ExperimentResult {
  std::vector<DiagnosticsRecord> records;
  std::optional<RunFailure> failure;
};

/// Settings keys: model, sigma, sigma1, sigma2, t_star, alpha0, nu, steps,
/// seed, filter_seed, variant, n, prior_lo, prior_hi, init, h, phi_fixed,
/// phi_init_hi, gamma, kappa, sigma_floor, log_weights, resample,
/// record_every, outputs, edge_p. Unknown keys are rejected.
ExperimentPlan plan_from_settings(const Settings& settings);
Settings read_settings_file(const std::string& path);
Settings parse_settings(std::istream& in, const std::string& origin = "<settings>");

/// Runs the plan's filter over `series`, keeping every record_every-th step.
ExperimentResult run_experiment(const ObservationSeries& series, const ExperimentPlan& plan);
/// Generates the series from plan.model / plan.data_seed first.
ExperimentResult run_experiment(const ExperimentPlan& plan);
ObservationSeries generate_series(const ExperimentPlan& plan);

inline constexpr const char* kRecordsHeader =
    "t,mean,variance,ks,zero_weight_prop,edge_mass_lo,edge_mass_hi,dispersion,avg_phi";

/// Header, one row per record, and `#ABORTED t=<k> reason=degenerate_weights`
/// when the run stopped early.
void write_records_csv(std::ostream& out, const ExperimentResult& result);
void write_records_csv(const std::string& path, const ExperimentResult& result);

struct KsPoint {
  std::size_t n_particles = 0;
  double ks = 0.0;
};

/// Final-step KS of `filter` on `series` for every particle count in
/// `n_grid` (strictly increasing). Throws std::invalid_argument otherwise.
std::vector<KsPoint> ks_convergence(const ObservationSeries& series, const FilterConfig& filter,
                                    const std::vector<std::size_t>& n_grid, unsigned workers = 1);
void write_ks_csv(std::ostream& out, const std::vector<KsPoint>& points);
void write_ks_csv(const std::string& path, const std::vector<KsPoint>& points);

/// Runs `jobs` on up to `workers` threads. Each job owns its state; results
/// come back in job order whatever the worker count.
void parallel_for(std::size_t jobs, unsigned workers, const std::function<void(std::size_t)>& body);

/// Worker count from ADAPTIVE_PF_WORKERS, else 1.
unsigned default_workers();

}  // namespace apf
