#include "apf/presets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "apf/benchmark.hpp"
#include "apf/csv.hpp"
#include "apf/errors.hpp"

namespace apf {
namespace {

// Defaults for values no experiment pins down.
constexpr std::size_t kParticles = 1000;
constexpr std::size_t kRegimeSteps = 20000;
constexpr std::size_t kChangeStep = 10000;
constexpr std::uint64_t kSeed = 1;
constexpr double kEdgeQuantile = 0.05;

ExperimentPlan base_plan(ModelSpec model, std::size_t steps, FilterVariant variant) {
  ExperimentPlan plan;
  plan.model = model;
  plan.steps = steps;
  plan.data_seed = kSeed;
  plan.filter.variant = variant;
  plan.filter.n_particles = kParticles;
  plan.filter.prior_lo = 0.001;
  plan.filter.prior_hi = 1.0;
  plan.filter.h = 0.1;
  plan.filter.seed = kSeed;
  plan.filter.edge_quantile = kEdgeQuantile;
  if (!is_gaussian(model)) plan.outputs.erase(Output::Ks);
  return plan;
}

ExperimentPlan gaussian(std::size_t steps, FilterVariant variant) {
  return base_plan(GaussianModel{0.2}, steps, variant);
}
ExperimentPlan regime(FilterVariant variant) {
  return base_plan(RegimeShiftModel{0.1, 0.3, kChangeStep}, kRegimeSteps, variant);
}
ExperimentPlan stochvol(double nu, FilterVariant variant) {
  return base_plan(StochVolModel{0.2, nu}, kRegimeSteps, variant);
}

std::string tag(double value) {
  std::ostringstream os;
  os << value;
  return os.str();
}

std::vector<Preset> build_presets() {
  std::vector<Preset> out;
  const double n = static_cast<double>(kParticles);

  {
    Preset p{"fig-ks-random", "KS vs particle count, random initialisation, SIS", {}};
    KsConvergenceJob job{gaussian(2000, FilterVariant::Sis), {}, log_grid(2.0, 4.0, 8)};
    job.filter = job.data.filter;
    job.filter.init = InitScheme::RandomUniform;
    p.jobs.push_back({"ks_random.csv", job});
    out.push_back(p);
  }
  {
    Preset p{"fig-ks-random-vs-equal", "KS vs particle count, random vs equally spaced initialisation", {}};
    for (const auto init : {InitScheme::RandomUniform, InitScheme::EqualSpaced}) {
      KsConvergenceJob job{gaussian(2000, FilterVariant::Sis), {}, log_grid(2.0, 4.0, 8)};
      job.filter = job.data.filter;
      job.filter.init = init;
      p.jobs.push_back({init == InitScheme::EqualSpaced ? "ks_equal.csv" : "ks_random.csv", job});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-posterior-random", "SIS posterior vs benchmark, 50 random particles", {}};
    ExperimentPlan plan = gaussian(2000, FilterVariant::Sis);
    plan.filter.n_particles = 50;
    plan.filter.init = InitScheme::RandomUniform;
    p.jobs.push_back({"posterior_random.csv", PosteriorSnapshotJob{plan}});
    out.push_back(p);
  }
  {
    Preset p{"fig-posterior-equal", "SIS posterior vs benchmark, 50 equally spaced particles", {}};
    ExperimentPlan plan = gaussian(2000, FilterVariant::Sis);
    plan.filter.n_particles = 50;
    p.jobs.push_back({"posterior_equal.csv", PosteriorSnapshotJob{plan}});
    out.push_back(p);
  }
  {
    Preset p{"fig-zero-weight", "Zero-weight proportion of linear-domain SIS", {}};
    ExperimentPlan plan = gaussian(100000, FilterVariant::Sis);
    plan.record_every = 100;
    plan.outputs = {Output::Posterior, Output::Ks, Output::ZeroWeight};
    p.jobs.push_back({"sis_zero_weight.csv", plan});
    out.push_back(p);
  }
  {
    Preset p{"fig-sir-impoverishment", "KS vs observations for SIR", {}};
    ExperimentPlan plan = gaussian(100000, FilterVariant::Sir);
    plan.filter.n_particles = 500;
    plan.record_every = 100;
    plan.outputs = {Output::Posterior, Output::Ks};
    p.jobs.push_back({"sir_ks.csv", plan});
    out.push_back(p);
  }
  {
    Preset p{"fig-sir-vs-lw", "KS vs observations, SIR and Liu-West", {}};
    for (const auto variant : {FilterVariant::Sir, FilterVariant::LiuWest}) {
      ExperimentPlan plan = gaussian(100000, variant);
      plan.filter.n_particles = 2000;
      plan.record_every = 1000;
      plan.outputs = {Output::Posterior, Output::Ks};
      p.jobs.push_back({variant == FilterVariant::Sir ? "sir_ks.csv" : "lw_ks.csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-posterior-lw", "Liu-West posterior vs benchmark after 10^4 observations", {}};
    p.jobs.push_back({"posterior_lw.csv", PosteriorSnapshotJob{gaussian(10000, FilterVariant::LiuWest)}});
    out.push_back(p);
  }
  {
    Preset p{"fig-regime-lw", "Liu-West posterior mean through a volatility regime change", {}};
    p.jobs.push_back({"regime_lw.csv", regime(FilterVariant::LiuWest)});
    out.push_back(p);
  }
  {
    Preset p{"fig-regime-lw-noise", "Liu-West with fixed extra kernel noise, regime change", {}};
    for (const double scale : {0.1, 1.0, 10.0, 100.0}) {
      ExperimentPlan plan = regime(FilterVariant::LwFixedNoise);
      plan.filter.phi_fixed = scale / n;
      p.jobs.push_back({"regime_lw_noise_phi-" + tag(scale) + "_over_N.csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-stocvol-lw-noise", "Liu-West with fixed extra kernel noise, stochastic volatility", {}};
    for (const double scale : {0.1, 1.0, 10.0, 100.0}) {
      ExperimentPlan plan = stochvol(0.001, FilterVariant::LwFixedNoise);
      plan.filter.phi_fixed = scale / n;
      p.jobs.push_back({"stocvol_lw_noise_phi-" + tag(scale) + "_over_N.csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-regime-selected-noise", "Per-particle noise under selection, regime change", {}};
    for (const double scale : {0.2, 2.0, 20.0, 200.0}) {
      ExperimentPlan plan = regime(FilterVariant::LwSelectedNoise);
      plan.filter.phi_init_hi = scale / n;
      p.jobs.push_back({"regime_selected_c-" + tag(scale) + "_over_N.csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-stocvol-selected-noise",
             "Per-particle noise under selection, stochastic volatility", {}};
    for (const double scale : {0.2, 2.0, 20.0, 200.0}) {
      ExperimentPlan plan = stochvol(0.001, FilterVariant::LwSelectedNoise);
      plan.filter.phi_init_hi = scale / n;
      p.jobs.push_back({"stocvol_selected_c-" + tag(scale) + "_over_N.csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-regime-accel-gamma-sweep", "Accelerated adaptation, gamma sweep, regime change", {}};
    for (const double gamma : {0.0001, 0.001, 0.01, 0.1}) {
      ExperimentPlan plan = regime(FilterVariant::LwAccel);
      plan.filter.phi_init_hi = 2.0 / n;
      plan.filter.gamma = gamma;
      p.jobs.push_back({"regime_accel_gamma-" + tag(gamma) + ".csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-stocvol-accel-gamma-sweep", "Accelerated adaptation, gamma sweep, stochastic volatility",
             {}};
    for (const double gamma : {0.0001, 0.001, 0.01, 0.1}) {
      ExperimentPlan plan = stochvol(0.001, FilterVariant::LwAccel);
      plan.filter.phi_init_hi = 200.0 / n;
      plan.filter.gamma = gamma;
      p.jobs.push_back({"stocvol_accel_gamma-" + tag(gamma) + ".csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-regime-accel-kappa-sweep", "Dampened accelerated adaptation, kappa sweep, regime change",
             {}};
    for (const double kappa : {0.01, 0.02, 0.03, 0.04}) {
      ExperimentPlan plan = regime(FilterVariant::LwAccel);
      plan.filter.phi_init_hi = 2.0 / n;
      plan.filter.gamma = 0.1;
      plan.filter.kappa = kappa;
      p.jobs.push_back({"regime_accel_kappa-" + tag(kappa) + ".csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-avgphi-gaussian", "Average phi on Gaussian data, gamma sweep", {}};
    for (const double gamma : {1.0, 0.01, 0.001, 0.0001}) {
      ExperimentPlan plan = gaussian(kRegimeSteps, FilterVariant::LwAccel);
      plan.filter.phi_init_hi = 2.0 / n;
      plan.filter.gamma = gamma;
      plan.filter.kappa = 0.01;
      p.jobs.push_back({"avgphi_gaussian_gamma-" + tag(gamma) + ".csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-avgphi-regime", "Average phi through a regime change, gamma sweep", {}};
    for (const double gamma : {1.0, 0.01, 0.001, 0.0001}) {
      ExperimentPlan plan = regime(FilterVariant::LwAccel);
      plan.filter.phi_init_hi = 2.0 / n;
      plan.filter.gamma = gamma;
      plan.filter.kappa = 0.01;
      p.jobs.push_back({"avgphi_regime_gamma-" + tag(gamma) + ".csv", plan});
    }
    out.push_back(p);
  }
  {
    Preset p{"fig-avgphi-stocvol", "Average phi on stochastic volatility data, nu sweep", {}};
    for (const double nu : {0.1, 0.2, 0.3, 0.4}) {
      ExperimentPlan plan = stochvol(nu, FilterVariant::LwAccel);
      plan.filter.phi_init_hi = 2.0 / n;
      plan.filter.gamma = 0.001;
      plan.filter.kappa = 0.01;
      p.jobs.push_back({"avgphi_stocvol_nu-" + tag(nu) + ".csv", plan});
    }
    out.push_back(p);
  }

  for (auto& preset : out) {
    for (auto& job : preset.jobs) {
      std::visit(
          [&](auto& j) {
            using J = std::decay_t<decltype(j)>;
            if constexpr (std::is_same_v<J, ExperimentPlan>) {
              j.preset_name = preset.name;
              j.filter.track_edge_mass = j.wants(Output::EdgeMass);
            } else if constexpr (std::is_same_v<J, PosteriorSnapshotJob>) {
              j.plan.preset_name = preset.name;
            } else {
              j.data.preset_name = preset.name;
            }
          },
          job.job);
    }
  }
  return out;
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

}  // namespace

std::vector<std::size_t> log_grid(double lo_exp, double hi_exp, int per_decade) {
  std::vector<std::size_t> grid;
  const int count = static_cast<int>(std::lround((hi_exp - lo_exp) * per_decade));
  for (int k = 0; k <= count; ++k) {
    const double e = lo_exp + static_cast<double>(k) / per_decade;
    const auto value = static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
    if (grid.empty() || value > grid.back()) grid.push_back(value);
  }
  return grid;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build_presets();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void write_snapshot_csv(std::ostream& out, const ObservationSeries& series, const Ensemble& posterior) {
  const BenchmarkPosterior bp = benchmark_from_increments(series.increments);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(posterior.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return posterior.sigmas[a] < posterior.sigmas[b]; });
  out << "sigma,weight,empirical_cdf,theoretical_cdf\n";
  double cumulative = 0.0;
  for (const Eigen::Index i : order) {
    cumulative += posterior.weights[i];
    const double sigma = posterior.sigmas[i];
    out << csv::format_double(sigma) << ',' << csv::format_double(posterior.weights[i]) << ','
        << csv::format_double(std::min(cumulative, 1.0)) << ','
        << csv::format_double(theoretical_cdf(bp, sigma)) << '\n';
  }
}

bool run_preset(const Preset& preset, const std::string& out_dir, unsigned workers, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> manifests(preset.jobs.size());
  std::vector<char> aborted(preset.jobs.size(), 0);

  parallel_for(preset.jobs.size(), workers, [&](std::size_t j) {
    const PresetJob& job = preset.jobs[j];
    const std::string path = join(out_dir, job.file);
    std::visit(
        [&](const auto& spec) {
          using J = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<J, ExperimentPlan>) {
            manifests[j] = spec.manifest();
            const ExperimentResult result = run_experiment(spec);
            aborted[j] = result.failure.has_value();
            write_records_csv(path, result);
          } else if constexpr (std::is_same_v<J, KsConvergenceJob>) {
            ExperimentPlan shown = spec.data;
            shown.filter = spec.filter;
            manifests[j] = shown.manifest();
            write_ks_csv(path, ks_convergence(generate_series(spec.data), spec.filter, spec.n_grid));
          } else {
            manifests[j] = spec.plan.manifest();
            const ObservationSeries series = generate_series(spec.plan);
            Ensemble posterior;
            const auto result = run<double>(series, spec.plan.filter, [&](std::size_t t, const Ensemble& ens) {
              if (t == series.steps()) posterior = ens;
            });
            aborted[j] = result.failure.has_value();
            std::ofstream out(path, std::ios::binary);
            if (!out) throw IoError("cannot open '" + path + "' for writing");
            if (!result.failure) write_snapshot_csv(out, series, posterior);
          }
        },
        job.job);
  });

  bool ok = true;
  for (std::size_t j = 0; j < preset.jobs.size(); ++j) {
    log << manifests[j] << " -> " << join(out_dir, preset.jobs[j].file) << (aborted[j] ? " (aborted)" : "")
        << '\n';
    ok = ok && !aborted[j];
  }
  return ok;
}

}  // namespace apf
