#include "wpinn/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "wpinn/errors.hpp"

namespace wpinn {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MeanStd mean_stddev(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::string config_summary(const TrainingConfig& c) {
  std::ostringstream out;
  out << "theta " << c.theta_hidden_layers << 'x' << c.theta_width << ' ' << to_string(c.activation_theta) << ", eta "
      << c.eta_hidden_layers << 'x' << c.eta_width << ' ' << to_string(c.activation_eta) << ", N_max " << c.n_max
      << ", N_min " << c.n_min << ", r_f " << c.reset_frequency << ", lambda " << c.lambda << ", epochs " << c.epochs
      << ", " << to_string(c.residual) << ", " << to_string(c.optimizer) << ", " << to_string(c.sampler);
  return out.str();
}

RunReport make_run_report(const EnsembleResult& ensemble, const ExperimentPreset& preset, const Field& reference,
                          int quad_n) {
  const Field ref = reference ? reference : make_reference(preset, error_time_nodes(preset, quad_n));
  RunReport report;
  report.preset = preset.id;
  report.config_summary = config_summary(ensemble.config);
  report.counts = ensemble.config.counts.value_or(preset.counts);
  std::vector<double> errs_T, errs;
  for (const auto& run : ensemble.runs) {
    RunEntry entry;
    entry.seed = run.seed;
    entry.criterion = run.final_training_error;
    entry.diverged = run.diverged;
    if (run.diverged) {
      entry.err_T = entry.err = std::nan("");
      ++report.n_diverged;
    } else {
      const NetworkParams& theta = run.theta_star;
      const auto e = relative_errors([&](double x, double t) { return forward_jet(theta, x, t).value; }, preset, ref,
                                     quad_n);
      entry.err_T = e.final_time;
      entry.err = e.space_time;
      errs_T.push_back(e.final_time);
      errs.push_back(e.space_time);
      ++report.n_used;
    }
    report.runs.push_back(entry);
  }
  if (report.n_used > 0) {
    const auto e = relative_errors([&](double x, double t) { return average_predict(ensemble, x, t).mean; }, preset,
                                   ref, quad_n);
    report.ensemble_err_T = e.final_time;
    report.ensemble_err = e.space_time;
  } else {
    report.ensemble_err_T = report.ensemble_err = std::nan("");
  }
  report.run_err_T = mean_stddev(errs_T);
  report.run_err = mean_stddev(errs);
  return report;
}

void ReportCollector::append(RunReport report) {
  std::lock_guard lock(mutex_);
  reports_.push_back(std::move(report));
}

std::vector<RunReport> ReportCollector::snapshot() const {
  std::lock_guard lock(mutex_);
  return reports_;
}

std::vector<SummaryRow> summarize(std::span<const RunReport> reports) {
  if (reports.empty()) throw ContractError("summarize: no reports");
  std::vector<SummaryRow> rows;
  for (const auto& r : reports)
    rows.push_back({std::string(to_string(r.preset)), r.counts.interior, r.counts.temporal_boundary,
                    r.counts.spatial_boundary, r.ensemble_err, r.ensemble_err_T});
  return rows;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
  return v;
}

template <typename Row, typename Parse>
std::vector<Row> read_csv(std::istream& in, const std::string& header, std::size_t n_fields, Parse parse) {
  std::string line;
  if (!std::getline(in, line) || line != header) throw ConfigError("CSV header mismatch, expected '" + header + "'");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != n_fields) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields: " + line);
    try {
      rows.push_back(parse(f));
    } catch (const std::logic_error& err) {
      throw ConfigError("bad CSV row '" + line + "': " + err.what());
    }
  }
  return rows;
}

const char* kSummaryHeader = "preset,M_int,M_tb,M_sb,E_r,E_r_T";
const char* kProfileHeader = "t,x,mean,stddev,exact_reference";

}  // namespace

void write_summary_csv(std::span<const SummaryRow> rows, std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows)
    out << r.preset << ',' << r.m_int << ',' << r.m_tb << ',' << r.m_sb << ',' << format_double(r.err) << ','
        << format_double(r.err_T) << '\n';
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
  return read_csv<SummaryRow>(in, kSummaryHeader, 6, [](const std::vector<std::string>& f) {
    return SummaryRow{f[0], std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), parse_double(f[4]),
                      parse_double(f[5])};
  });
}

std::string format_summary_text(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %12s %12s\n", "preset", "M_int", "M_tb", "M_sb", "E_r", "E_r^T");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %8d %8d %8d %12.4e %12.4e\n", r.preset.c_str(), r.m_int, r.m_tb, r.m_sb,
                  r.err, r.err_T);
    out << buf;
  }
  return out.str();
}

namespace {

Field default_reference(const ExperimentPreset& preset, std::span<const double> times) {
  return make_reference(preset, times);
}

void check_profile_args(const ExperimentPreset& preset, std::span<const double> times, int n_x) {
  if (n_x < 2) throw ContractError("profile_dump: n_x must be at least 2");
  for (double t : times)
    if (!(t >= 0.0 && t <= preset.T)) throw ContractError("profile_dump: time outside [0, T]");
}

double node(const ExperimentPreset& preset, int i, int n_x) {
  if (i == n_x - 1) return preset.domain.hi;
  return preset.domain.lo + preset.domain.width() * i / (n_x - 1);
}

}  // namespace

std::vector<ProfileRow> profile_dump(const EnsembleResult& ensemble, const ExperimentPreset& preset,
                                     std::span<const double> times, int n_x, const Field& reference) {
  check_profile_args(preset, times, n_x);
  const Field ref = reference ? reference : default_reference(preset, times);
  std::vector<ProfileRow> rows;
  rows.reserve(times.size() * n_x);
  for (double t : times) {
    std::vector<double> xs(n_x), ts(n_x, t), mean, sd;
    for (int i = 0; i < n_x; ++i) xs[i] = node(preset, i, n_x);
    average_predict(ensemble, xs, ts, mean, sd);
    for (int i = 0; i < n_x; ++i) rows.push_back({t, xs[i], mean[i], sd[i], ref(xs[i], t)});
  }
  return rows;
}

std::vector<ProfileRow> profile_dump(const Field& predictor, const ExperimentPreset& preset,
                                     std::span<const double> times, int n_x, const Field& reference) {
  check_profile_args(preset, times, n_x);
  const Field ref = reference ? reference : default_reference(preset, times);
  std::vector<ProfileRow> rows;
  rows.reserve(times.size() * n_x);
  for (double t : times)
    for (int i = 0; i < n_x; ++i) {
      const double x = node(preset, i, n_x);
      rows.push_back({t, x, predictor(x, t), 0.0, ref(x, t)});
    }
  return rows;
}

void write_profile_csv(std::span<const ProfileRow> rows, std::ostream& out) {
  out << kProfileHeader << '\n';
  for (const auto& r : rows)
    out << format_double(r.t) << ',' << format_double(r.x) << ',' << format_double(r.mean) << ','
        << format_double(r.stddev) << ',' << format_double(r.exact) << '\n';
}

std::vector<ProfileRow> read_profile_csv(std::istream& in) {
  return read_csv<ProfileRow>(in, kProfileHeader, 5, [](const std::vector<std::string>& f) {
    return ProfileRow{parse_double(f[0]), parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                      parse_double(f[4])};
  });
}

void write_history_csv(std::span<const EpochRecord> history, std::ostream& out) {
  out << "epoch,J_pde,J_u,c_star,reset\n";
  for (const auto& r : history)
    out << r.epoch << ',' << format_double(r.j_pde) << ',' << format_double(r.j_u) << ',' << format_double(r.c_star)
        << ',' << (r.reset ? 1 : 0) << '\n';
}

void write_runs_csv(const RunReport& report, std::ostream& out) {
  out << "run,seed,criterion,E_r_T,E_r,diverged\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    out << i << ',' << r.seed << ',' << format_double(r.criterion) << ',' << format_double(r.err_T) << ','
        << format_double(r.err) << ',' << (r.diverged ? 1 : 0) << '\n';
  }
}

}  // namespace wpinn
