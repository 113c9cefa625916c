// adaptive_pf: data generation, filter runs, KS convergence studies, named
// presets and parameter sweeps. Exit codes: 0 ok, 1 validation, 2 I/O,
// 3 degenerate weights.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "apf/csv.hpp"
#include "apf/errors.hpp"
#include "apf/harness.hpp"
#include "apf/models.hpp"
#include "apf/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitDegenerate = 3;

const std::vector<std::string> kModelKeys = {"model", "sigma", "sigma1", "sigma2", "t_star",
                                             "alpha0", "nu",   "steps",  "seed"};
const std::vector<std::string> kFilterKeys = {"filter_seed", "variant",    "n",          "prior_lo",
                                              "prior_hi",    "init",       "h",          "phi_fixed",
                                              "phi_init_hi", "gamma",      "kappa",      "sigma_floor",
                                              "resample",    "record_every", "outputs",  "edge_p"};

std::string flag_name(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

/// Registers one string option per settings key; set flags override the config file.
struct SettingsFlags {
  std::map<std::string, std::string> values;
  std::string config_path;
  bool log_weights = false;

  void add(CLI::App* app, const std::vector<std::string>& keys) {
    for (const auto& key : keys) app->add_option(flag_name(key), values[key], "setting '" + key + "'");
  }

  apf::Settings resolve(const CLI::App* app, const std::vector<std::string>& keys) const {
    apf::Settings settings;
    if (!config_path.empty()) settings = apf::read_settings_file(config_path);
    for (const auto& key : keys) {
      if (app->count(flag_name(key)) > 0) settings[key] = values.at(key);
    }
    if (log_weights) settings["log_weights"] = "true";
    return settings;
  }
};

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  for (const auto field : apf::csv::split_fields(text)) {
    const double value = apf::csv::parse_double(field);
    if (!(value >= 1.0) || value != static_cast<double>(static_cast<std::size_t>(value))) {
      throw std::invalid_argument("particle grid entries must be positive integers");
    }
    grid.push_back(static_cast<std::size_t>(value));
  }
  return grid;
}

bool constant_truth(const apf::ObservationSeries& series) {
  if (!series.truth || series.truth->size() == 0) return true;
  return (series.truth->array() == (*series.truth)[0]).all();
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle filters with accelerated adaptation for volatility learning"};
  app.require_subcommand(1);
  // `--h` is the kernel bandwidth, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  unsigned workers = apf::default_workers();

  // generate
  auto* generate = app.add_subcommand("generate", "Simulate an observation series to CSV (t,x,dx,truth)");
  SettingsFlags gen_flags;
  std::string gen_out;
  gen_flags.add(generate, kModelKeys);
  generate->add_option("--config", gen_flags.config_path, "flat key = value settings file");
  generate->add_option("--out", gen_out, "output CSV")->required();

  // run
  auto* run = app.add_subcommand("run", "Filter a series and write per-step diagnostics CSV");
  SettingsFlags run_flags;
  std::string run_in, run_out;
  run_flags.add(run, kModelKeys);
  run_flags.add(run, kFilterKeys);
  run->add_option("--config", run_flags.config_path, "flat key = value settings file");
  run->add_option("--in", run_in, "series CSV (otherwise simulated from the model settings)");
  run->add_option("--out", run_out, "output CSV")->required();
  run->add_flag("--log-weights", run_flags.log_weights, "accumulate weights in the log domain");

  // ks-convergence
  auto* ksc = app.add_subcommand("ks-convergence", "Final-step KS for each particle count (CSV N,ks)");
  SettingsFlags ks_flags;
  std::string ks_in, ks_out, ks_grid;
  ks_flags.add(ksc, kModelKeys);
  ks_flags.add(ksc, kFilterKeys);
  ksc->add_option("--config", ks_flags.config_path, "flat key = value settings file");
  ksc->add_option("--in", ks_in, "Gaussian series CSV (otherwise simulated)");
  ksc->add_option("--n-grid", ks_grid, "comma-separated, strictly increasing particle counts")->required();
  ksc->add_option("--out", ks_out, "output CSV")->required();
  ksc->add_option("--workers", workers, "parallel runs");
  ksc->add_flag("--log-weights", ks_flags.log_weights, "accumulate weights in the log domain");

  // preset
  auto* preset = app.add_subcommand("preset", "Run a named experiment set with pinned settings");
  std::string preset_name, preset_dir = "out";
  bool list_presets = false;
  preset->add_option("name", preset_name, "preset name");
  preset->add_option("--out-dir,--out", preset_dir, "output directory");
  preset->add_option("--workers", workers, "parallel runs");
  preset->add_flag("--list", list_presets, "list presets");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a base configuration over a parameter grid and seeds");
  SettingsFlags sweep_flags;
  std::string sweep_param, sweep_values, sweep_seeds = "1", sweep_dir = "out";
  sweep_flags.add(sweep, kModelKeys);
  sweep_flags.add(sweep, kFilterKeys);
  sweep->add_option("--config", sweep_flags.config_path, "flat key = value settings file");
  sweep->add_option("--param", sweep_param, "settings key to vary")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("--seeds", sweep_seeds, "comma-separated seeds");
  sweep->add_option("--out-dir,--out", sweep_dir, "output directory");
  sweep->add_option("--workers", workers, "parallel runs");
  sweep->add_flag("--log-weights", sweep_flags.log_weights, "accumulate weights in the log domain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*generate) {
      const apf::ExperimentPlan plan = apf::plan_from_settings(gen_flags.resolve(generate, kModelKeys));
      const apf::ObservationSeries series = apf::generate_series(plan);
      ensure_parent(gen_out);
      apf::write_series_csv(gen_out, series);
      return kExitOk;
    }

    if (*run) {
      std::vector<std::string> keys = kModelKeys;
      keys.insert(keys.end(), kFilterKeys.begin(), kFilterKeys.end());
      apf::ExperimentPlan plan = apf::plan_from_settings(run_flags.resolve(run, keys));
      const apf::ObservationSeries series = run_in.empty() ? apf::generate_series(plan) : apf::read_series_csv(run_in);
      if (!run_in.empty() && plan.wants(apf::Output::Ks) && !constant_truth(series)) {
        throw std::invalid_argument("ks output needs a Gaussian series; '" + run_in + "' has varying volatility");
      }
      std::cout << plan.manifest() << '\n';
      const apf::ExperimentResult result = apf::run_experiment(series, plan);
      ensure_parent(run_out);
      apf::write_records_csv(run_out, result);
      if (result.failure) {
        std::cerr << "run aborted at t=" << result.failure->t << ": " << result.failure->reason << '\n';
        return kExitDegenerate;
      }
      return kExitOk;
    }

    if (*ksc) {
      std::vector<std::string> keys = kModelKeys;
      keys.insert(keys.end(), kFilterKeys.begin(), kFilterKeys.end());
      apf::Settings settings = ks_flags.resolve(ksc, keys);
      settings.try_emplace("outputs", "posterior");
      const apf::ExperimentPlan plan = apf::plan_from_settings(settings);
      if (!apf::is_gaussian(plan.model)) throw std::invalid_argument("ks-convergence needs the gaussian model");
      const apf::ObservationSeries series = ks_in.empty() ? apf::generate_series(plan) : apf::read_series_csv(ks_in);
      if (!constant_truth(series)) {
        throw std::invalid_argument("ks-convergence needs a Gaussian series (no benchmark posterior otherwise)");
      }
      std::cout << plan.manifest() << '\n';
      const auto points = apf::ks_convergence(series, plan.filter, parse_grid(ks_grid), workers);
      ensure_parent(ks_out);
      apf::write_ks_csv(ks_out, points);
      return kExitOk;
    }

    if (*preset) {
      if (list_presets || preset_name.empty()) {
        for (const auto& p : apf::presets()) {
          std::cout << p.name << "\t" << p.description << '\n';
        }
        return preset_name.empty() && !list_presets ? kExitValidation : kExitOk;
      }
      const apf::Preset* found = apf::find_preset(preset_name);
      if (!found) {
        std::cerr << "unknown preset '" << preset_name << "'; known presets:\n";
        for (const auto& p : apf::presets()) std::cerr << "  " << p.name << '\n';
        return kExitValidation;
      }
      const bool ok = apf::run_preset(*found, preset_dir, workers, std::cout);
      return ok ? kExitOk : kExitDegenerate;
    }

    if (*sweep) {
      std::vector<std::string> keys = kModelKeys;
      keys.insert(keys.end(), kFilterKeys.begin(), kFilterKeys.end());
      const apf::Settings base = sweep_flags.resolve(sweep, keys);
      std::vector<apf::ExperimentPlan> plans;
      std::vector<std::string> files;
      for (const auto seed : apf::csv::split_fields(sweep_seeds)) {
        for (const auto value : apf::csv::split_fields(sweep_values)) {
          apf::Settings s = base;
          s[sweep_param] = std::string(value);
          s["seed"] = std::string(seed);
          if (!base.contains("filter_seed")) s["filter_seed"] = std::string(seed);
          plans.push_back(apf::plan_from_settings(s));
          files.push_back(sweep_param + "-" + std::string(value) + "_seed-" + std::string(seed) + ".csv");
        }
      }
      std::filesystem::create_directories(sweep_dir);
      std::vector<apf::ExperimentResult> results(plans.size());
      apf::parallel_for(plans.size(), workers, [&](std::size_t j) { results[j] = apf::run_experiment(plans[j]); });
      bool aborted = false;
      for (std::size_t j = 0; j < plans.size(); ++j) {
        const std::string path = (std::filesystem::path(sweep_dir) / files[j]).string();
        apf::write_records_csv(path, results[j]);
        std::cout << plans[j].manifest() << " -> " << path << '\n';
        aborted = aborted || results[j].failure.has_value();
      }
      return aborted ? kExitDegenerate : kExitOk;
    }
  } catch (const apf::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const apf::DegenerateWeightsError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    // Malformed input files surface here.
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}
