#include "apf/models.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "apf/csv.hpp"
#include "apf/errors.hpp"

namespace apf {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void validate(const ModelSpec& spec, std::size_t steps) {
  require(steps >= 1, "model: need at least one step");
  std::visit(overloaded{
                 [](const GaussianModel& m) { require(m.sigma > 0.0, "gaussian: sigma must be positive"); },
                 [steps](const RegimeShiftModel& m) {
                   require(m.sigma1 > 0.0 && m.sigma2 > 0.0, "regime: sigma1 and sigma2 must be positive");
                   require(m.t_star >= 1, "regime: t_star must be >= 1");
                   require(m.t_star <= steps, "regime: t_star must lie inside the path");
                 },
                 [](const StochVolModel& m) {
                   require(m.alpha0 > 0.0, "stochvol: alpha0 must be positive");
                   require(m.nu >= 0.0, "stochvol: nu must be nonnegative");
                 },
             },
             spec);
}

std::string describe(const ModelSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const GaussianModel& m) { os << "gaussian sigma=" << m.sigma; },
                 [&](const RegimeShiftModel& m) {
                   os << "regime sigma1=" << m.sigma1 << " sigma2=" << m.sigma2 << " t_star=" << m.t_star;
                 },
                 [&](const StochVolModel& m) { os << "stochvol alpha0=" << m.alpha0 << " nu=" << m.nu; },
             },
             spec);
  return os.str();
}

ObservationSeries generate(const ModelSpec& spec, std::size_t steps, RngStream& rng) {
  validate(spec, steps);
  const auto n = static_cast<Eigen::Index>(steps);
  Eigen::VectorXd vol(n);

  std::visit(overloaded{
                 [&](const GaussianModel& m) { vol.setConstant(m.sigma); },
                 [&](const RegimeShiftModel& m) {
                   for (Eigen::Index i = 0; i < n; ++i) {
                     const auto t = static_cast<std::size_t>(i) + 1;
                     vol[i] = t < m.t_star ? m.sigma1 : m.sigma2;
                   }
                 },
                 [&](const StochVolModel& m) {
                   RngStream vol_rng = rng.fork(1);
                   double alpha = m.alpha0;
                   for (Eigen::Index i = 0; i < n; ++i) {
                     vol[i] = alpha;
                     alpha = std::abs(alpha + m.nu * vol_rng.next_standard_normal());
                   }
                 },
             },
             spec);

  ObservationSeries series;
  series.values.resize(n + 1);
  series.increments.resize(n);
  series.values[0] = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    series.values[i + 1] = series.values[i] + vol[i] * rng.next_standard_normal();
    series.increments[i] = series.values[i + 1] - series.values[i];
  }
  series.truth = std::move(vol);
  return series;
}

ObservationSeries series_from_increments(const Eigen::Ref<const Eigen::VectorXd>& increments) {
  ObservationSeries series;
  const Eigen::Index n = increments.size();
  series.values.resize(n + 1);
  series.values[0] = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) series.values[i + 1] = series.values[i] + increments[i];
  series.increments = increments;
  return series;
}

void write_series_csv(std::ostream& out, const ObservationSeries& series) {
  out << "t,x,dx,truth\n";
  out << "0," << csv::format_double(series.values[0]) << ",,\n";
  for (Eigen::Index i = 0; i < series.increments.size(); ++i) {
    out << (i + 1) << ',' << csv::format_double(series.values[i + 1]) << ','
        << csv::format_double(series.increments[i]) << ',';
    if (series.truth) out << csv::format_double((*series.truth)[i]);
    out << '\n';
  }
}

void write_series_csv(const std::string& path, const ObservationSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_series_csv(out, series);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

ObservationSeries read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,x,dx,truth") {
    throw std::runtime_error("series csv: expected header 't,x,dx,truth'");
  }
  std::vector<double> values, increments, truth;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_fields(line);
    if (fields.size() != 4) throw std::runtime_error("series csv: expected 4 fields at row " + std::to_string(row));
    if (static_cast<std::size_t>(csv::parse_double(fields[0])) != row) {
      throw std::runtime_error("series csv: rows out of order at row " + std::to_string(row));
    }
    values.push_back(csv::parse_double(fields[1]));
    if (row > 0) {
      increments.push_back(csv::parse_double(fields[2]));
      if (!fields[3].empty()) truth.push_back(csv::parse_double(fields[3]));
    }
    ++row;
  }
  if (values.empty()) throw std::runtime_error("series csv: no rows");
  if (!truth.empty() && truth.size() != increments.size()) {
    throw std::runtime_error("series csv: truth column must be complete or empty");
  }
  ObservationSeries series;
  series.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  series.increments =
      Eigen::Map<const Eigen::VectorXd>(increments.data(), static_cast<Eigen::Index>(increments.size()));
  if (!truth.empty()) {
    series.truth = Eigen::Map<const Eigen::VectorXd>(truth.data(), static_cast<Eigen::Index>(truth.size()));
  }
  return series;
}

ObservationSeries read_series_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_series_csv(in);
}

}  // namespace apf
