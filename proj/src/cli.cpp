#include "wpinn/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <ctime>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "wpinn/config.hpp"
#include "wpinn/errors.hpp"
#include "wpinn/lemmas.hpp"
#include "wpinn/metrics.hpp"
#include "wpinn/oracles.hpp"
#include "wpinn/training.hpp"

#ifndef WPINN_GIT_DESCRIBE
#define WPINN_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;

namespace wpinn {

namespace {

struct Options {
  std::string preset;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int> n_theta;
  std::string grid;
  std::string format = "text";
  // fv-reference
  int cells = 16384;
  double cfl = 0.5;
  std::optional<double> t_end;
  // dump-profile
  std::vector<std::string> checkpoints;
  std::vector<double> times;
  int n_x = 201;
};

// A usage-level failure discovered after parsing (bad combination of flags).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig resolve_config(const Options& o) {
  RunConfig c;
  if (!o.config_path.empty()) apply_config_file(c, o.config_path);
  // --preset wins over the file and resets preset defaults only when it
  // changes the preset.
  if (!o.preset.empty()) {
    const PresetId id = parse_preset(o.preset);
    if (o.config_path.empty() || id != c.preset) {
      if (!o.config_path.empty()) throw UsageError("--preset conflicts with the preset in " + o.config_path);
      c = default_run_config(id);
    }
  }
  for (const auto& kv : o.overrides) apply_override(c, kv);
  if (o.seed) c.training.seed = *o.seed;
  if (o.epochs) c.training.epochs = *o.epochs;
  if (o.n_theta) c.n_theta = *o.n_theta;
  if (!o.grid.empty()) c.grid = parse_grid(o.grid);
  if (o.threads > 0) c.threads = o.threads;
  if (c.n_theta < 1) throw ConfigError("n_theta must be at least 1");
  if (c.threads < 0) throw ConfigError("threads must be non-negative");
  c.training.validate();
  return c;
}

int available_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return s.str();
}

// --out wins; otherwise a fresh timestamped directory under $WPINN_OUTPUT_ROOT
// (default ./runs).
fs::path output_dir(const Options& o, const std::string& command, std::string_view preset) {
  fs::path dir;
  if (!o.out_dir.empty()) {
    dir = o.out_dir;
  } else {
    const char* root = std::getenv("WPINN_OUTPUT_ROOT");
    const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
    const std::string stem = command + "_" + std::string(preset) + "_" + timestamp();
    dir = base / stem;
    for (int i = 2; fs::exists(dir); ++i) dir = base / (stem + "_" + std::to_string(i));
  }
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

CheckpointFormat checkpoint_format(const std::string& name) {
  if (name == "text") return CheckpointFormat::text;
  if (name == "binary") return CheckpointFormat::binary;
  throw ConfigError("unknown checkpoint format '" + name + "'");
}

const char* checkpoint_ext(CheckpointFormat f) { return f == CheckpointFormat::text ? ".txt" : ".bin"; }

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& c,
                    const std::vector<std::uint64_t>& run_seeds) {
  auto f = open_out(dir / "manifest.ini");
  f << "; command: " << command << '\n';
  f << "; git: " << WPINN_GIT_DESCRIBE << '\n';
  f << "; seeds (run: base, theta init, eta init, collocation):";
  for (std::uint64_t s : run_seeds)
    f << ' ' << s << '/' << derive_seed(s, 1) << '/' << derive_seed(s, 2) << '/' << derive_seed(s, 3);
  f << "\n; reproduce with: wpinn " << command << " --config manifest.ini\n\n";
  f << to_ini(c);
}

std::string progress_line(const EpochRecord& r) {
  std::ostringstream s;
  s << "epoch " << r.epoch << "  J_pde " << std::setprecision(4) << r.j_pde << "  J_u " << r.j_u << "  c* "
    << r.c_star;
  return s.str();
}

int cmd_train(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o);
  const auto fmt = checkpoint_format(o.format);
  c.training.kernel_threads = c.threads > 0 ? c.threads : available_threads();
  const ExperimentPreset preset = make_preset(c.preset);
  const fs::path dir = output_dir(o, "train", to_string(c.preset));
  write_manifest(dir, "train", c, {c.training.seed});

  const int every = std::max(1, c.training.epochs / 20);
  const auto t0 = std::chrono::steady_clock::now();
  TrainedModel model = train_one(c.training, preset, [&](const EpochRecord& r) {
    if (r.epoch % every == 0) out << progress_line(r) << std::endl;
  });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_checkpoint(model.theta_star, (dir / (std::string("theta") + checkpoint_ext(fmt))).string(), fmt);
  save_checkpoint(model.eta_star, (dir / (std::string("eta") + checkpoint_ext(fmt))).string(), fmt);
  {
    auto f = open_out(dir / "history.csv");
    write_history_csv(model.history, f);
  }
  EnsembleResult single{c.training, {model}, model.final_training_error, model.diverged ? 1 : 0};
  RunReport report = make_run_report(single, preset);
  report.wall_seconds = wall;
  {
    auto f = open_out(dir / "runs.csv");
    write_runs_csv(report, f);
  }
  if (model.diverged) {
    out << "run diverged: " << model.failure << '\n';
    out << "outputs in " << dir.string() << '\n';
    return 1;
  }
  const std::vector<RunReport> reports{report};
  const auto rows = summarize(reports);
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(rows, f);
  }
  out << format_summary_text(rows);
  out << "criterion " << format_double(model.final_training_error) << ", wall " << std::fixed << std::setprecision(1)
      << wall << " s\n";
  out << "outputs in " << dir.string() << '\n';
  return 0;
}

int cmd_ensemble(const Options& o, std::ostream& out) {
  RunConfig c = resolve_config(o);
  const auto fmt = checkpoint_format(o.format);
  const ExperimentPreset preset = make_preset(c.preset);
  const auto grid = hyperparameter_grid(c.grid, c.training);
  const int threads = c.threads > 0 ? c.threads : std::min(available_threads(), c.n_theta);
  const fs::path dir = output_dir(o, "ensemble", to_string(c.preset));
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < c.n_theta; ++i) seeds.push_back(c.training.seed + i);
  write_manifest(dir, "ensemble", c, seeds);

  EnsembleOptions opts;
  opts.threads = threads;
  opts.base_seed = c.training.seed;
  opts.on_run_done = [&](int ci, int ri, const TrainedModel& m) {
    out << grid[ci].label << " run " << ri << ": criterion " << m.final_training_error
        << (m.diverged ? " (diverged)" : "") << std::endl;
  };
  out << grid.size() << " configuration(s) x " << c.n_theta << " runs on " << threads << " thread(s)" << std::endl;
  const auto t0 = std::chrono::steady_clock::now();
  const EnsembleSelection sel = run_ensemble(grid, c.n_theta, preset, opts);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  {
    auto f = open_out(dir / "selection.csv");
    f << "config,label,mean_criterion,n_runs,n_diverged\n";
    for (std::size_t i = 0; i < sel.per_config.size(); ++i) {
      const auto& e = sel.per_config[i];
      f << i << ',' << e.config.label << ',' << format_double(e.mean_criterion) << ',' << e.runs.size() << ','
        << e.n_diverged << '\n';
    }
  }
  const EnsembleResult& best = sel.best();
  fs::create_directories(dir / "best");
  for (std::size_t i = 0; i < best.runs.size(); ++i) {
    const std::string stem = "run" + std::to_string(i);
    save_checkpoint(best.runs[i].theta_star, (dir / "best" / (stem + "_theta" + checkpoint_ext(fmt))).string(), fmt);
    save_checkpoint(best.runs[i].eta_star, (dir / "best" / (stem + "_eta" + checkpoint_ext(fmt))).string(), fmt);
    auto f = open_out(dir / "best" / (stem + "_history.csv"));
    write_history_csv(best.runs[i].history, f);
  }
  RunReport report = make_run_report(best, preset);
  report.wall_seconds = wall;
  {
    auto f = open_out(dir / "runs.csv");
    write_runs_csv(report, f);
  }
  const std::vector<RunReport> reports{report};
  const auto rows = summarize(reports);
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(rows, f);
  }
  {
    const std::vector<double> times{0.0, 0.5 * preset.T, preset.T};
    auto f = open_out(dir / "profile.csv");
    write_profile_csv(profile_dump(best, preset, times, 201), f);
  }
  out << "selected " << best.config.label << " (" << config_summary(best.config) << ")\n";
  out << "mean criterion " << format_double(best.mean_criterion) << ", " << report.n_used << " used, "
      << report.n_diverged << " diverged\n";
  out << format_summary_text(rows);
  out << "single-run E_r^T " << report.run_err_T.mean << " +- " << report.run_err_T.stddev << ", wall " << std::fixed
      << std::setprecision(1) << wall << " s\n";
  out << "outputs in " << dir.string() << '\n';
  return 0;
}

int cmd_fv_reference(const Options& o, std::ostream& out) {
  if (o.preset.empty()) throw UsageError("fv-reference needs --preset");
  const ExperimentPreset preset = make_preset(parse_preset(o.preset));
  if (o.cells < 2) throw ConfigError("--cells must be at least 2");
  if (!(o.cfl > 0.0 && o.cfl <= 1.0)) throw ConfigError("--cfl must lie in (0, 1]");
  const double t_end = o.t_end.value_or(preset.T);
  if (!(t_end >= 0.0)) throw ConfigError("--t-end must be non-negative");
  const fs::path dir = output_dir(o, "fv-reference", to_string(preset.id));
  const FVGrid grid = fv_solve(preset, o.cells, o.cfl, t_end);
  auto f = open_out(dir / "fv_profile.csv");
  // Cell centres plus the two Dirichlet boundary nodes.
  f << "x_center,u\n";
  f << format_double(preset.domain.lo) << ',' << format_double(preset.boundary(preset.domain.lo, t_end)) << '\n';
  for (int i = 0; i < grid.n_cells; ++i) f << format_double(grid.center(i)) << ',' << format_double(grid.u[i]) << '\n';
  f << format_double(preset.domain.hi) << ',' << format_double(preset.boundary(preset.domain.hi, t_end)) << '\n';
  out << "Godunov, " << o.cells << " cells, cfl " << o.cfl << ", t = " << t_end << '\n';
  if (preset.has_closed_form()) {
    double l1 = 0.0;
    for (int i = 0; i < grid.n_cells; ++i) l1 += std::abs(grid.u[i] - exact_solution(preset, grid.center(i), t_end));
    out << "L1 error vs closed form " << l1 * grid.dx << '\n';
  }
  out << "outputs in " << dir.string() << '\n';
  return 0;
}

int cmd_check_lemmas(const Options& o, std::ostream& out) {
  bool ok = true;
  for (const auto& check : run_lemma_checks(o.seed.value_or(0))) {
    out << (check.passed ? "PASS  " : "FAIL  ") << check.name << "  [" << check.detail << "]\n";
    ok = ok && check.passed;
  }
  return ok ? 0 : 1;
}

int cmd_dump_profile(const Options& o, std::ostream& out) {
  if (o.preset.empty()) throw UsageError("dump-profile needs --preset");
  if (o.checkpoints.empty()) throw UsageError("dump-profile needs at least one --checkpoint");
  const ExperimentPreset preset = make_preset(parse_preset(o.preset));
  std::vector<double> times = o.times;
  if (times.empty()) times = {0.0, 0.5 * preset.T, preset.T};
  for (double t : times)
    if (!(t >= 0.0 && t <= preset.T)) throw ConfigError("--times must lie in [0, T]");
  if (o.n_x < 2) throw ConfigError("--n-x must be at least 2");
  EnsembleResult ensemble;
  for (const auto& path : o.checkpoints) {
    TrainedModel m;
    m.theta_star = load_checkpoint(path);
    ensemble.runs.push_back(std::move(m));
  }
  const fs::path dir = output_dir(o, "dump-profile", to_string(preset.id));
  auto f = open_out(dir / "profile.csv");
  write_profile_csv(profile_dump(ensemble, preset, times, o.n_x), f);
  out << ensemble.runs.size() << " network(s), " << times.size() << " time(s) x " << o.n_x << " nodes\n";
  out << "outputs in " << dir.string() << '\n';
  return 0;
}

void add_config_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--preset", o.preset, "standing_shock | moving_shock | rarefaction | sine");
  cmd->add_option("--config", o.config_path, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "override, key=value or section.key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--threads", o.threads, "worker threads (default: available, capped by n_theta)");
  cmd->add_option("--out", o.out_dir, "output directory (default: timestamped under $WPINN_OUTPUT_ROOT)");
  cmd->add_option("--format", o.format, "checkpoint format: text | binary");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak PINNs for scalar conservation laws"};
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "train one solution network");
  add_config_flags(train, o);
  auto* ensemble = app.add_subcommand("ensemble", "ensemble training over a hyperparameter grid");
  add_config_flags(ensemble, o);
  ensemble->add_option("--grid", o.grid, "single | table1 | table2");
  ensemble->add_option("--n-theta", o.n_theta, "retrainings per configuration");

  auto* fv = app.add_subcommand("fv-reference", "Godunov reference solve, written as CSV");
  fv->add_option("--preset", o.preset)->required();
  fv->add_option("--cells", o.cells, "number of cells");
  fv->add_option("--cfl", o.cfl, "CFL number");
  fv->add_option("--t-end", o.t_end, "final time (default: preset T)");
  fv->add_option("--out", o.out_dir, "output directory");

  auto* lemmas = app.add_subcommand("check-lemmas", "numerical sweeps of the analytic lemmas");
  lemmas->add_option("--seed", o.seed, "sample seed");

  auto* dump = app.add_subcommand("dump-profile", "mean/stddev profiles of trained networks");
  dump->add_option("--preset", o.preset)->required();
  dump->add_option("--checkpoint", o.checkpoints, "theta checkpoint (repeatable)")->required();
  dump->add_option("--times", o.times, "output times");
  dump->add_option("--n-x", o.n_x, "nodes in x");
  dump->add_option("--out", o.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(o, out);
    if (*ensemble) return cmd_ensemble(o, out);
    if (*fv) return cmd_fv_reference(o, out);
    if (*lemmas) return cmd_check_lemmas(o, out);
    if (*dump) return cmd_dump_profile(o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace wpinn
