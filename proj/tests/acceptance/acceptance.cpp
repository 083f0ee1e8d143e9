// Acceptance suite. Usage: wpinn_acceptance [criterion...] [--cache DIR]
// Prints one PASS/FAIL line per criterion; exit status 1 if any failed.
//
// Criteria 3 and 4 train full ensembles (hours on one core). With --cache (or
// WPINN_ACCEPTANCE_CACHE) the trained theta checkpoints are kept and reused
// when the stored configuration matches exactly; errors are always recomputed.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "../support.hpp"
#include "wpinn/cli.hpp"
#include "wpinn/config.hpp"
#include "wpinn/lemmas.hpp"
#include "wpinn/metrics.hpp"
#include "wpinn/oracles.hpp"
#include "wpinn/sampling.hpp"
#include "wpinn/test_functions.hpp"
#include "wpinn/training.hpp"

namespace fs = std::filesystem;
using namespace wpinn;
using wpinn::testing::rel_err;

namespace {

// Pinned tolerances.
constexpr double kJetTol = 1e-6;
constexpr double kGradTol = 1e-4;
constexpr double kEntropySlack = 0.02;
constexpr double kStandingErrT = 0.05;
constexpr double kMovingErrT = 0.06;
constexpr double kRarefactionErrT = 0.07;
constexpr double kSineErr = 0.10;
constexpr double kRatioLo = 1.6, kRatioHi = 2.4;
constexpr double kFvErr4096 = 0.01;
constexpr double kOneMinute = 60.0;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path g_cache;

int hw_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------

Outcome autodiff() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 0.5);
  double worst_jet = 0.0, worst_grad = 0.0;
  int loss_checked = 0, params_checked = 0, straddled = 0;
  for (int n = 0; n < 200; ++n) {
    const Activation act = n % 2 ? Activation::sin : Activation::tanh;
    const auto widths = wpinn::testing::random_widths(rng, 4, 20);
    NetworkParams theta = wpinn::testing::random_net(rng, widths, act);

    const double x = ux(rng), t = ut(rng);
    const Jet j = forward_jet(theta, x, t);
    const double fx = wpinn::testing::central_diff([&](double v) { return forward_jet(theta, v, t).value; }, x, 1e-5);
    const double ft = wpinn::testing::central_diff([&](double v) { return forward_jet(theta, x, v).value; }, t, 1e-5);
    worst_jet = std::max({worst_jet, rel_err(j.dx, fx, 1e-3), rel_err(j.dt, ft, 1e-3)});

    // Full loss through the ReLU, max over C and denominator paths. Instances
    // near a kink (inactive ReLU, close runner-up c, u near the chosen c) are
    // redrawn with fresh collocation points.
    const auto preset = make_preset(n % 3 == 0 ? PresetId::rarefaction : PresetId::moving_shock);
    TrainingConfig c;
    c.c_count = 10;
    c.residual = n % 5 == 4 ? ResidualKind::naive : ResidualKind::entropy;
    c.lambda_placement = n % 7 == 6 ? LambdaPlacement::data : LambdaPlacement::pde;
    c.test_sign = c.residual == ResidualKind::entropy && n % 2 == 0 ? TestSign::nonnegative : TestSign::any;
    NetworkParams xi = wpinn::testing::random_net(rng, wpinn::testing::random_widths(rng, 4, 20),
                                                  n % 3 ? Activation::tanh : Activation::sin);
    for (int attempt = 0; attempt < 8; ++attempt) {
      const CollocationSets sets = sample_uniform(preset.domain, preset.T, {20, 6, 6}, rng());
      LossProblem problem(c, preset, sets);
      PdeTerm top = problem.ascent_objective(theta, xi, nullptr);
      if (top.residual_sum < 0.0) {
        const int last = xi.layout().num_layers() - 1;
        xi.weight(last) *= -1.0;
        xi.bias(last) *= -1.0;
        top = problem.ascent_objective(theta, xi, nullptr);
      }
      if (!(top.residual_sum > 0.0)) continue;
      if (c.residual == ResidualKind::entropy) {
        const EntropyCSet grid = make_c_grid(c, preset);
        double second = 0.0;
        for (int k = 0; k < grid.count; ++k)
          if (k != top.c_index)
            second = std::max(second, loss_J_pde(theta, xi, c, preset, sets, grid.values[k]).value);
        if (top.value - second < 1e-3 * top.value) continue;
        bool near = false;
        for (std::size_t i = 0; i < sets.interior_x.size(); ++i)
          near = near || std::abs(forward_jet(theta, sets.interior_x[i], sets.interior_t[i]).value - top.c) < 1e-4;
        if (near) continue;
      }

      GradientBuffer g_xi(xi.layout()), g_theta(theta.layout());
      problem.ascent_objective(theta, xi, &g_xi);
      problem.descent_objective(theta, xi, &g_theta);
      auto check = [&](NetworkParams& p, const GradientBuffer& g, double floor,
                       const std::function<double(const NetworkParams&)>& f) {
        std::uniform_int_distribution<std::size_t> pick(0, p.size() - 1);
        const std::size_t n_check = std::min<std::size_t>(p.size(), 24);
        for (std::size_t m = 0; m < n_check; ++m) {
          const std::size_t k = p.size() <= 24 ? m : pick(rng);
          const double saved = p.values()[k];
          // Fourth-order stencil: a second-order one at a step small enough
          // for 1e-4 is dominated by rounding on the tiny entries.
          const double h = 1e-4 * std::max(1.0, std::abs(saved));
          auto at = [&](double v) {
            p.values()[k] = v;
            return f(p);
          };
          const double fd = (8.0 * (at(saved + h) - at(saved - h)) - (at(saved + 2 * h) - at(saved - 2 * h))) / (12.0 * h);
          // Two differences that disagree mean the stencil straddles a kink.
          const double fd_near = (at(saved + 0.1 * h) - at(saved - 0.1 * h)) / (0.2 * h);
          p.values()[k] = saved;
          if (rel_err(fd, fd_near, floor) > 1e-3) {
            ++straddled;
            continue;
          }
          worst_grad = std::max(worst_grad, rel_err(g.values()[k], fd, floor));
          ++params_checked;
        }
      };
      check(xi, g_xi, 1e-6 * std::max(1.0, top.value),
            [&](const NetworkParams& q) { return problem.ascent_objective(theta, q, nullptr).value; });
      check(theta, g_theta, 1e-6, [&](const NetworkParams& q) { return problem.descent_objective(q, xi, nullptr); });
      ++loss_checked;
      break;
    }
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.passed = worst_jet < kJetTol && worst_grad < kGradTol && loss_checked >= 150 && straddled * 100 < params_checked && secs < kOneMinute;
  o.detail = "200 nets; jet rel err " + fmt(worst_jet) + ", loss-gradient rel err " + fmt(worst_grad) + " over " +
             std::to_string(params_checked) + " parameters in " + std::to_string(loss_checked) +
             " loss instances (" + std::to_string(straddled) + " skipped at a kink); " + fmt(secs, 3) + " s";
  return o;
}

// ---------------------------------------------------------------------------

// -int int (|u - c| phi_t + Q[u; c] phi_x) dx dt by a midpoint grid on the
// test function's support box, in physical coordinates.
double entropy_residual(const ExperimentPreset& preset, const AnalyticTestFn& fn, double c, int n) {
  const double r = analytic_support_radius(fn);
  const double w = preset.domain.width();
  const double x0 = std::max(preset.domain.lo, preset.domain.lo + w * (fn.y - r));
  const double x1 = std::min(preset.domain.hi, preset.domain.lo + w * (fn.y + r));
  const double t0 = std::max(0.0, fn.s - r), t1 = std::min(preset.T, fn.s + r);
  const double hx = (x1 - x0) / n, ht = (t1 - t0) / n;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = t0 + (j + 0.5) * ht;
    for (int i = 0; i < n; ++i) {
      const double x = x0 + (i + 0.5) * hx;
      const double u = exact_solution(preset, x, t);
      const Jet phi = analytic_test_fn_on(fn, preset.domain, x, t);
      sum += std::abs(u - c) * phi.dt + kruzkhov_q(preset.flux, u, c) * phi.dx;
    }
  }
  return -sum * hx * ht;
}

Outcome entropy_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto preset = make_preset(PresetId::moving_shock);
  // The stated centre, and one on the shock (x = s/2) where the inequality is strict.
  const AnalyticTestFn centred = AnalyticTestFn::make(0.25, 0.25, 0.1, preset.T);
  const AnalyticTestFn on_shock = AnalyticTestFn::make(0.5625, 0.25, 0.1, preset.T);
  double worst = -1e300, worst_shock = -1e300;
  for (int k = 0; k < 10; ++k) {
    const double c = -0.1 + 1.2 * k / 9.0;
    worst = std::max(worst, entropy_residual(preset, centred, c, 400));
    worst_shock = std::max(worst_shock, entropy_residual(preset, on_shock, c, 400));
  }
  const double secs = seconds_since(t0);
  return {worst <= kEntropySlack && worst_shock <= kEntropySlack && secs < kOneMinute,
          "max_c R = " + fmt(worst) + " at (0.25, 0.25), " + fmt(worst_shock) + " on the shock; " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------

struct EnsembleSpec {
  PresetId preset;
  ResidualKind residual = ResidualKind::entropy;
  int epochs = 5000;
  int n_theta = 5;
};

std::string spec_name(const EnsembleSpec& s) {
  return std::string(to_string(s.preset)) + "_" + std::string(to_string(s.residual));
}

RunConfig spec_config(const EnsembleSpec& s) {
  RunConfig c = default_run_config(s.preset);
  c.training.epochs = s.epochs;
  c.training.residual = s.residual;
  c.n_theta = s.n_theta;
  return c;
}

// Trains (or reloads) the ensemble. Only theta is needed for the errors.
EnsembleResult ensemble_for(const EnsembleSpec& s, bool& cached) {
  const RunConfig rc = spec_config(s);
  const ExperimentPreset preset = make_preset(s.preset);
  const std::string ini = to_ini(rc);
  const fs::path dir = g_cache.empty() ? fs::path() : g_cache / spec_name(s);
  cached = false;
  if (!dir.empty() && fs::exists(dir / "config.ini")) {
    std::ifstream in(dir / "config.ini");
    const std::string stored{std::istreambuf_iterator<char>(in), {}};
    bool complete = stored == ini;
    for (int i = 0; complete && i < s.n_theta; ++i)
      complete = fs::exists(dir / ("run" + std::to_string(i) + "_theta.txt"));
    if (complete) {
      EnsembleResult e;
      e.config = rc.training;
      for (int i = 0; i < s.n_theta; ++i) {
        TrainedModel m;
        m.seed = rc.training.seed + i;
        const fs::path p = dir / ("run" + std::to_string(i) + "_theta.txt");
        std::ifstream status(dir / ("run" + std::to_string(i) + "_status.txt"));
        std::string word;
        status >> word >> m.final_training_error;
        m.diverged = word == "diverged";
        if (!m.diverged) m.theta_star = load_checkpoint(p.string());
        e.runs.push_back(std::move(m));
      }
      cached = true;
      return e;
    }
  }
  EnsembleOptions opts;
  opts.threads = hw_threads();
  opts.base_seed = rc.training.seed;
  opts.on_run_done = [&](int, int run, const TrainedModel& m) {
    std::cerr << "  " << spec_name(s) << " run " << run << (m.diverged ? " diverged" : " done") << std::endl;
  };
  EnsembleResult e = run_ensemble({rc.training}, s.n_theta, preset, opts).best();
  if (!dir.empty()) {
    fs::create_directories(dir);
    for (std::size_t i = 0; i < e.runs.size(); ++i) {
      const auto& m = e.runs[i];
      save_checkpoint(m.theta_star, (dir / ("run" + std::to_string(i) + "_theta.txt")).string(), CheckpointFormat::text);
      std::ofstream(dir / ("run" + std::to_string(i) + "_status.txt"))
          << (m.diverged ? "diverged " : "ok ") << format_double(m.final_training_error) << '\n';
    }
    std::ofstream(dir / "config.ini") << ini;
  }
  return e;
}

Outcome table3() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Row {
    PresetId id;
    int epochs;
    double bound;
    bool space_time;
  };
  const Row rows[] = {{PresetId::standing_shock, 5000, kStandingErrT, false},
                      {PresetId::moving_shock, 5000, kMovingErrT, false},
                      {PresetId::rarefaction, 5000, kRarefactionErrT, false},
                      {PresetId::sine, 20000, kSineErr, true}};
  Outcome o{true, ""};
  for (const Row& r : rows) {
    bool cached = false;
    const EnsembleResult e = ensemble_for({r.id, ResidualKind::entropy, r.epochs, 5}, cached);
    const RunReport rep = make_run_report(e, make_preset(r.id));
    const double err = r.space_time ? rep.ensemble_err : rep.ensemble_err_T;
    const bool ok = std::isfinite(err) && err <= r.bound;
    o.passed = o.passed && ok;
    o.detail += std::string(to_string(r.id)) + (r.space_time ? " E_r " : " E_r^T ") + fmt(err) + (ok ? " <= " : " > ") +
                fmt(r.bound) + (cached ? " (cached)" : "") + "; ";
  }
  o.detail += fmt(seconds_since(t0), 4) + " s";
  return o;
}

// ---------------------------------------------------------------------------

// L1 distance at T between the averaged predictor and a profile.
double l1_at_T(const EnsembleResult& e, const ExperimentPreset& preset, const std::function<double(double)>& ref) {
  const int n = 2001;
  std::vector<double> xs(n), ts(n, preset.T), mean, sd;
  for (int i = 0; i < n; ++i) xs[i] = preset.domain.lo + preset.domain.width() * i / (n - 1);
  average_predict(e, xs, ts, mean, sd);
  const double h = preset.domain.width() / (n - 1);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (i == 0 || i == n - 1 ? 0.5 : 1.0) * h * std::abs(mean[i] - ref(xs[i]));
  return s;
}

Outcome dichotomy() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto preset = make_preset(PresetId::rarefaction);
  const auto rarefaction = [&](double x) { return exact_solution(preset, x, preset.T); };
  const auto standing = [](double x) { return x <= 0.0 ? -1.0 : 1.0; };
  Outcome o{true, ""};
  for (ResidualKind kind : {ResidualKind::entropy, ResidualKind::naive}) {
    bool cached = false;
    const EnsembleResult e = ensemble_for({PresetId::rarefaction, kind, 5000, 5}, cached);
    const double d_rare = l1_at_T(e, preset, rarefaction), d_shock = l1_at_T(e, preset, standing);
    const bool ok = kind == ResidualKind::entropy ? d_rare < d_shock : d_shock < d_rare;
    o.passed = o.passed && ok;
    o.detail += std::string(to_string(kind)) + ": L1 to rarefaction " + fmt(d_rare) + ", to standing shock " +
                fmt(d_shock) + (cached ? " (cached)" : "") + "; ";
  }
  o.detail += fmt(seconds_since(t0), 4) + " s";
  return o;
}

// ---------------------------------------------------------------------------

Outcome fv_quality() {
  const auto preset = make_preset(PresetId::rarefaction);
  std::vector<double> errs;
  double worst_mass = 0.0, worst_max = 0.0;
  for (int n = 256; n <= 8192; n *= 2) {
    const FVGrid g = fv_solve(preset, n, 0.5, preset.T, [&](const FVStep& s) {
      const double expected = s.mass_before + s.dt * (s.flux_in - s.flux_out);
      worst_mass = std::max(worst_mass, std::abs(s.mass_after - expected) / std::max(1.0, std::abs(s.mass_before)));
      worst_max = std::max(worst_max, s.max_abs);
    });
    // Exact cell averages by 8-point midpoint sub-sampling of each cell.
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
      double avg = 0.0;
      for (int q = 0; q < 8; ++q)
        avg += exact_solution(preset, g.domain.lo + (i + (q + 0.5) / 8.0) * g.dx, preset.T) / 8.0;
      e += std::abs(g.u[i] - avg) * g.dx;
    }
    errs.push_back(e);
  }
  bool ratios_ok = true;
  std::string ratios;
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    const double r = errs[k] / errs[k + 1];
    ratios_ok = ratios_ok && r >= kRatioLo && r <= kRatioHi;
    ratios += fmt(r, 3) + (k + 2 < errs.size() ? " " : "");
  }
  const double e4096 = errs[4];
  const bool ok = ratios_ok && e4096 < kFvErr4096 && worst_mass < 1e-13 && worst_max <= 1.0;
  return {ok, "ratios [" + ratios + "], L1 at 4096 cells " + fmt(e4096) + ", conservation defect " + fmt(worst_mass) +
                  ", max |u| " + format_double(worst_max)};
}

// ---------------------------------------------------------------------------

Outcome lemmas() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto checks = run_lemma_checks();
  const double secs = seconds_since(t0);
  Outcome o{secs < kOneMinute, ""};
  for (const auto& c : checks) {
    o.passed = o.passed && c.passed;
    if (!c.passed) o.detail += "failed " + c.name + " (" + c.detail + "); ";
  }
  o.detail += std::to_string(checks.size()) + " checks in " + fmt(secs, 3) + " s";
  return o;
}

// ---------------------------------------------------------------------------

double van_der_corput(std::uint64_t i) {
  double v = 0.0, base = 0.5;
  for (; i; i >>= 1, base *= 0.5)
    if (i & 1) v += base;
  return v;
}

Outcome sobol() {
  const SobolSequence seq(2);
  int mismatches = 0;
  for (std::uint64_t i = 0; i < 1024; ++i)
    if (seq.point(i)[0] != van_der_corput(i)) ++mismatches;
  int bad_boxes = 0;
  for (int k = 0; k <= 6; ++k)
    for (int a = 0; a <= k; ++a) {
      const int b = k - a;
      std::map<std::pair<int, int>, int> count;
      for (std::uint64_t i = 0; i < (1u << k); ++i) {
        const auto p = seq.point(i);
        ++count[{static_cast<int>(p[0] * (1 << a)), static_cast<int>(p[1] * (1 << b))}];
      }
      if (count.size() != (1u << k)) ++bad_boxes;
      for (const auto& [box, n] : count)
        if (n != 1) ++bad_boxes;
    }
  return {mismatches == 0 && bad_boxes == 0, std::to_string(mismatches) + " van der Corput mismatches in 1024, " +
                                                 std::to_string(bad_boxes) + " bad dyadic boxes for k <= 6"};
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) {
      std::ifstream in(entry.path(), std::ios::binary);
      files[fs::relative(entry.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
    }
  return files;
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "wpinn_acceptance_repro";
  fs::remove_all(root);
  std::map<std::string, std::string> trees[2];
  for (int k = 0; k < 2; ++k) {
    const std::string out = (root / ("run" + std::to_string(k))).string();
    std::vector<const char*> argv{"wpinn", "train", "--preset", "moving_shock", "--epochs", "40", "--seed", "17",
                                  "--format", "binary", "--out", out.c_str()};
    std::ostringstream sink;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), sink, std::cerr);
    if (code != 0) return {false, "train exited with " + std::to_string(code)};
    trees[k] = read_tree(out);
  }
  std::string differing;
  for (const auto& [name, bytes] : trees[0]) {
    auto it = trees[1].find(name);
    if (it == trees[1].end() || it->second != bytes) differing += name + " ";
  }
  fs::remove_all(root);
  const bool ok = differing.empty() && trees[0].size() == trees[1].size() && trees[0].count("theta.bin");
  return {ok, ok ? std::to_string(trees[0].size()) + " files bit-identical" : "differing: " + differing};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, Outcome (*)()>> criteria{
      {1, {"autodiff correctness", autodiff}},
      {2, {"entropy inequality sanity", entropy_sanity}},
      {3, {"error table at desk scale", table3}},
      {4, {"entropy selection dichotomy", dichotomy}},
      {5, {"finite-volume reference quality", fv_quality}},
      {6, {"lemma property sweeps", lemmas}},
      {7, {"Sobol correctness", sobol}},
      {8, {"reproducibility", reproducibility}}};

  if (const char* env = std::getenv("WPINN_ACCEPTANCE_CACHE")) g_cache = env;
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cache" && i + 1 < argc) {
      g_cache = argv[++i];
    } else if (a.size() == 1 && criteria.count(a[0] - '0')) {
      selected.push_back(a[0] - '0');
    } else {
      std::cerr << "usage: wpinn_acceptance [1-8 ...] [--cache DIR]\n";
      return 2;
    }
  }
  if (selected.empty())
    for (const auto& [id, _] : criteria) selected.push_back(id);

  bool all = true;
  for (int id : selected) {
    const auto& [name, fn] = criteria.at(id);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.passed;
    std::cout << "criterion " << id << " " << (o.passed ? "PASS" : "FAIL") << "  " << name << ": " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
