#pragma once

// Run reports, the per-preset error summary, and profile dumps for plotting.
// Every CSV is written with 17 significant digits so it parses back exactly.

#include <iosfwd>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "wpinn/oracles.hpp"
#include "wpinn/training.hpp"

namespace wpinn {

/// Mean and sample standard deviation by the two-pass formula; stddev is 0
/// for fewer than two values.
MeanStd mean_stddev(std::span<const double> values);

struct RunEntry {
  std::uint64_t seed = 0;
  double criterion = 0.0;
  double err_T = 0.0;  // E_r^T of this run alone
  double err = 0.0;    // E_r of this run alone
  bool diverged = false;
};

struct RunReport {
  PresetId preset = PresetId::standing_shock;
  std::string config_summary;
  CollocationCounts counts;
  std::vector<RunEntry> runs;
  int n_used = 0;
  int n_diverged = 0;
  double ensemble_err_T = 0.0;  // errors of the retraining-averaged predictor
  double ensemble_err = 0.0;
  MeanStd run_err_T{0.0, 0.0};  // spread of the single-run errors
  MeanStd run_err{0.0, 0.0};
  double wall_seconds = 0.0;
};

/// One-line description of the fields that distinguish configurations.
std::string config_summary(const TrainingConfig& config);

/// Errors of every non-diverged run and of the averaged predictor. `reference`
/// defaults to the preset's reference solution.
RunReport make_run_report(const EnsembleResult& ensemble, const ExperimentPreset& preset, const Field& reference = {},
                          int quad_n = 1000);

/// Append-only collection shared by concurrent producers.
class ReportCollector {
 public:
  void append(RunReport report);
  std::vector<RunReport> snapshot() const;

 private:
  mutable std::mutex mutex_;
  std::vector<RunReport> reports_;
};

struct SummaryRow {
  std::string preset;
  int m_int = 0;
  int m_tb = 0;
  int m_sb = 0;
  double err = 0.0;
  double err_T = 0.0;
};

/// One row per report, in input order. Throws ContractError on an empty list.
std::vector<SummaryRow> summarize(std::span<const RunReport> reports);
void write_summary_csv(std::span<const SummaryRow> rows, std::ostream& out);
std::vector<SummaryRow> read_summary_csv(std::istream& in);
std::string format_summary_text(std::span<const SummaryRow> rows);

struct ProfileRow {
  double t = 0.0;
  double x = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double exact = 0.0;
};

/// Rows (t, x, mean, stddev, exact_reference) at n_x uniform nodes for each t.
/// The reference defaults to the exact solution (or an FV reference for sine).
std::vector<ProfileRow> profile_dump(const EnsembleResult& ensemble, const ExperimentPreset& preset,
                                     std::span<const double> times, int n_x, const Field& reference = {});
/// Single predictor; stddev is zero.
std::vector<ProfileRow> profile_dump(const Field& predictor, const ExperimentPreset& preset,
                                     std::span<const double> times, int n_x, const Field& reference = {});
void write_profile_csv(std::span<const ProfileRow> rows, std::ostream& out);
std::vector<ProfileRow> read_profile_csv(std::istream& in);

void write_history_csv(std::span<const EpochRecord> history, std::ostream& out);
void write_runs_csv(const RunReport& report, std::ostream& out);

/// "%.17g" formatting.
std::string format_double(double v);

}  // namespace wpinn
