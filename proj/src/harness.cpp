#include "apf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "apf/benchmark.hpp"
#include "apf/csv.hpp"
#include "apf/errors.hpp"

namespace apf {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model",   "sigma",     "sigma1",     "sigma2",      "t_star",       "alpha0",   "nu",
      "steps",   "seed",      "filter_seed", "variant",    "n",            "prior_lo", "prior_hi",
      "init",    "h",         "phi_fixed",  "phi_init_hi", "gamma",        "kappa",    "sigma_floor",
      "log_weights", "resample", "record_every", "outputs", "edge_p"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

class SettingsReader {
 public:
  explicit SettingsReader(const Settings& s) : settings_(s) {
    for (const auto& [key, value] : s) {
      if (!known_keys().contains(key)) throw std::invalid_argument("unknown setting '" + key + "'");
    }
  }

  bool has(const std::string& key) const { return settings_.contains(key); }

  std::string text(const std::string& key, std::string fallback) const {
    const auto it = settings_.find(key);
    return it == settings_.end() ? fallback : it->second;
  }

  double real(const std::string& key, double fallback) const {
    const auto it = settings_.find(key);
    if (it == settings_.end()) return fallback;
    try {
      return csv::parse_double(it->second);
    } catch (const std::exception&) {
      throw std::invalid_argument("setting '" + key + "': not a number: '" + it->second + "'");
    }
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    const auto it = settings_.find(key);
    if (it == settings_.end()) return fallback;
    std::uint64_t value = 0;
    const std::string& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw std::invalid_argument("setting '" + key + "': not a nonnegative integer: '" + s + "'");
    }
    return value;
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto it = settings_.find(key);
    if (it == settings_.end()) return fallback;
    if (it->second == "1" || it->second == "true" || it->second == "yes") return true;
    if (it->second == "0" || it->second == "false" || it->second == "no") return false;
    throw std::invalid_argument("setting '" + key + "': expected true/false");
  }

 private:
  const Settings& settings_;
};

std::set<Output> parse_outputs(const std::string& list) {
  static const std::map<std::string, Output> names = {
      {"posterior", Output::Posterior}, {"ks", Output::Ks},
      {"zero_weight", Output::ZeroWeight}, {"edge_mass", Output::EdgeMass},
      {"dispersion", Output::Dispersion}, {"avg_phi", Output::AvgPhi}};
  std::set<Output> out;
  if (list == "all") {
    for (const auto& [name, o] : names) out.insert(o);
    return out;
  }
  for (const auto field : csv::split_fields(list)) {
    const auto it = names.find(trim(field));
    if (it == names.end()) throw std::invalid_argument("unknown output '" + std::string(field) + "'");
    out.insert(it->second);
  }
  return out;
}

void put(std::ostream& out, const std::optional<double>& v) {
  if (v) out << csv::format_double(*v);
}

}  // namespace

void ExperimentPlan::validate() const {
  apf::validate(model, steps);
  filter.validate();
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (wants(Output::Ks) && !is_gaussian(model)) {
    throw std::invalid_argument("ks output needs the gaussian model (no benchmark posterior otherwise)");
  }
}

std::string ExperimentPlan::manifest() const {
  std::ostringstream os;
  os << "# manifest";
  if (preset_name) os << " preset=" << *preset_name;
  os << " model={" << describe(model) << "} steps=" << steps << " data_seed=" << data_seed << " filter={"
     << describe(filter) << "} record_every=" << record_every << " edge_p=" << filter.edge_quantile;
  return os.str();
}

Settings parse_settings(std::istream& in, const std::string& origin) {
  Settings settings;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    settings[trim(std::string_view(body).substr(0, eq))] = trim(std::string_view(body).substr(eq + 1));
  }
  return settings;
}

Settings read_settings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse_settings(in, path);
}

ExperimentPlan plan_from_settings(const Settings& settings) {
  const SettingsReader s(settings);
  ExperimentPlan plan;
  plan.steps = s.count("steps", plan.steps);

  const std::string model = s.text("model", "gaussian");
  if (model == "gaussian") {
    plan.model = GaussianModel{s.real("sigma", 0.2)};
  } else if (model == "regime") {
    plan.model = RegimeShiftModel{s.real("sigma1", 0.1), s.real("sigma2", 0.3), s.count("t_star", 10000)};
  } else if (model == "stochvol") {
    plan.model = StochVolModel{s.real("alpha0", 0.2), s.real("nu", 0.1)};
  } else {
    throw std::invalid_argument("unknown model '" + model + "' (gaussian, regime, stochvol)");
  }

  plan.data_seed = s.count("seed", plan.data_seed);
  FilterConfig& f = plan.filter;
  f.seed = s.count("filter_seed", plan.data_seed);
  f.variant = parse_variant(s.text("variant", std::string(to_string(f.variant))));
  f.n_particles = s.count("n", f.n_particles);
  f.prior_lo = s.real("prior_lo", f.prior_lo);
  f.prior_hi = s.real("prior_hi", f.prior_hi);
  f.init = parse_init(s.text("init", std::string(to_string(f.init))));
  f.h = s.real("h", f.h);
  f.phi_fixed = s.real("phi_fixed", f.phi_fixed);
  f.phi_init_hi = s.real("phi_init_hi", f.phi_init_hi);
  f.gamma = s.real("gamma", f.gamma);
  f.kappa = s.real("kappa", f.kappa);
  f.sigma_floor = s.real("sigma_floor", f.sigma_floor);
  f.log_domain_weights = s.flag("log_weights", f.log_domain_weights);
  if (s.has("resample")) f.resample_policy = parse_resample_policy(s.text("resample", ""));
  f.edge_quantile = s.real("edge_p", f.edge_quantile);
  plan.record_every = s.count("record_every", plan.record_every);

  if (s.has("outputs")) {
    plan.outputs = parse_outputs(s.text("outputs", "all"));
  } else if (!is_gaussian(plan.model)) {
    plan.outputs.erase(Output::Ks);
  }
  plan.filter.track_edge_mass = plan.wants(Output::EdgeMass);
  plan.validate();
  return plan;
}

ObservationSeries generate_series(const ExperimentPlan& plan) {
  RngStream rng(plan.data_seed, 0);
  return generate(plan.model, plan.steps, rng);
}

ExperimentResult run_experiment(const ObservationSeries& series, const ExperimentPlan& plan) {
  if (plan.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  FilterConfig config = plan.filter;
  config.track_edge_mass = plan.wants(Output::EdgeMass);

  // KS against the benchmark built from increments 1..t.
  std::vector<double> cumulative_sq(series.steps() + 1, 0.0);
  for (std::size_t t = 1; t <= series.steps(); ++t) {
    const double dx = series.increments[static_cast<Eigen::Index>(t - 1)];
    cumulative_sq[t] = cumulative_sq[t - 1] + dx * dx;
  }
  std::map<std::size_t, double> ks_at;
  PosteriorObserver<double> observer;
  if (plan.wants(Output::Ks)) {
    observer = [&](std::size_t t, const Ensemble& ens) {
      if (t % plan.record_every != 0 || t < 2) return;
      const BenchmarkPosterior bp{cumulative_sq[t] / static_cast<double>(t), static_cast<long>(t)};
      ks_at[t] = ks_statistic(weighted_sample(ens), bp);
    };
  }

  const RunResult<double> run_result = run<double>(series, config, observer);
  ExperimentResult out;
  out.failure = run_result.failure;
  for (const auto& r : run_result.steps) {
    if (r.t % plan.record_every != 0) continue;
    DiagnosticsRecord rec;
    rec.t = r.t;
    rec.mean = r.posterior_mean;
    rec.variance = r.posterior_variance;
    if (const auto it = ks_at.find(r.t); it != ks_at.end()) rec.ks = it->second;
    if (plan.wants(Output::ZeroWeight)) rec.zero_weight_prop = r.zero_weight_prop;
    if (plan.wants(Output::EdgeMass) && r.edge) {
      rec.edge_mass_lo = r.edge->lo;
      rec.edge_mass_hi = r.edge->hi;
    }
    if (plan.wants(Output::Dispersion)) rec.dispersion = r.dispersion_total;
    if (plan.wants(Output::AvgPhi)) rec.avg_phi = r.avg_phi;
    out.records.push_back(rec);
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  return run_experiment(generate_series(plan), plan);
}

void write_records_csv(std::ostream& out, const ExperimentResult& result) {
  out << kRecordsHeader << '\n';
  for (const auto& r : result.records) {
    out << r.t << ',' << csv::format_double(r.mean) << ',' << csv::format_double(r.variance) << ',';
    put(out, r.ks);
    out << ',';
    put(out, r.zero_weight_prop);
    out << ',';
    put(out, r.edge_mass_lo);
    out << ',';
    put(out, r.edge_mass_hi);
    out << ',';
    put(out, r.dispersion);
    out << ',';
    put(out, r.avg_phi);
    out << '\n';
  }
  if (result.failure) out << "#ABORTED t=" << result.failure->t << " reason=degenerate_weights\n";
}

void write_records_csv(const std::string& path, const ExperimentResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_records_csv(out, result);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<KsPoint> ks_convergence(const ObservationSeries& series, const FilterConfig& filter,
                                    const std::vector<std::size_t>& n_grid, unsigned workers) {
  if (n_grid.empty()) throw std::invalid_argument("ks_convergence: empty particle grid");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
    throw std::invalid_argument("ks_convergence: particle grid must be strictly increasing");
  }
  const BenchmarkPosterior bp = benchmark_from_increments(series.increments);
  std::vector<KsPoint> points(n_grid.size());
  parallel_for(n_grid.size(), workers, [&](std::size_t j) {
    FilterConfig config = filter;
    config.n_particles = n_grid[j];
    config.track_edge_mass = false;
    double ks = 1.0;
    const auto result = run<double>(series, config, [&](std::size_t t, const Ensemble& ens) {
      if (t == series.steps()) ks = ks_statistic(weighted_sample(ens), bp);
    });
    if (result.failure) {
      throw DegenerateWeightsError("ks_convergence: N=" + std::to_string(n_grid[j]) +
                                   " degenerate at t=" + std::to_string(result.failure->t));
    }
    points[j] = {n_grid[j], ks};
  });
  return points;
}

void write_ks_csv(std::ostream& out, const std::vector<KsPoint>& points) {
  out << "N,ks\n";
  for (const auto& p : points) out << p.n_particles << ',' << csv::format_double(p.ks) << '\n';
}

void write_ks_csv(const std::string& path, const std::vector<KsPoint>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_ks_csv(out, points);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

void parallel_for(std::size_t jobs, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(jobs, 1))));
  if (workers == 1) {
    for (std::size_t j = 0; j < jobs; ++j) body(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < jobs; j = next++) {
        try {
          body(j);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

unsigned default_workers() {
  if (const char* env = std::getenv("ADAPTIVE_PF_WORKERS")) {
    unsigned value = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc{} && ptr == s.data() + s.size() && value > 0) return value;
  }
  return 1;
}

}  // namespace apf
