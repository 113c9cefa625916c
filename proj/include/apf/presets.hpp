#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "apf/harness.hpp"

namespace apf {

/// KS against particle count on one fixed Gaussian series.
struct KsConvergenceJob {
  ExperimentPlan data;  // model, steps and data_seed are used
  FilterConfig filter;
  std::vector<std::size_t> n_grid;
};

/// Final-step weighted posterior next to the benchmark CDF.
struct PosteriorSnapshotJob {
  ExperimentPlan plan;
};

struct PresetJob {
  std::string file;
  std::variant<ExperimentPlan, KsConvergenceJob, PosteriorSnapshotJob> job;
};

/// A pinned, reproducible set of experiment runs.
struct Preset {
  std::string name;
  std::string description;
  std::vector<PresetJob> jobs;
};

const std::vector<Preset>& presets();
/// nullptr when unknown.
const Preset* find_preset(const std::string& name);

/// Particle grid 10^lo .. 10^hi in `per_decade` log-even steps, rounded.
std::vector<std::size_t> log_grid(double lo_exp, double hi_exp, int per_decade);

/// Writes `sigma,weight,empirical_cdf,theoretical_cdf` sorted by sigma.
void write_snapshot_csv(std::ostream& out, const ObservationSeries& series, const Ensemble& posterior);

/// Runs every job, writing `<out_dir>/<job.file>`; manifest lines go to `log`.
/// Jobs fan out over `workers`; files are identical to a serial run.
/// Returns false if any run aborted on degenerate weights.
bool run_preset(const Preset& preset, const std::string& out_dir, unsigned workers, std::ostream& log);

}  // namespace apf
