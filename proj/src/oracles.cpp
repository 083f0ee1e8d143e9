#include "wpinn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wpinn/errors.hpp"

namespace wpinn {

PresetId parse_preset(std::string_view name) {
  if (name == "standing_shock") return PresetId::standing_shock;
  if (name == "moving_shock") return PresetId::moving_shock;
  if (name == "rarefaction") return PresetId::rarefaction;
  if (name == "sine") return PresetId::sine;
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::string_view to_string(PresetId id) {
  switch (id) {
    case PresetId::standing_shock:
      return "standing_shock";
    case PresetId::moving_shock:
      return "moving_shock";
    case PresetId::rarefaction:
      return "rarefaction";
    case PresetId::sine:
      return "sine";
  }
  return "?";
}

ExperimentPreset make_preset(PresetId id) {
  ExperimentPreset p;
  p.id = id;
  p.domain = {-1.0, 1.0};
  switch (id) {
    case PresetId::standing_shock:
    case PresetId::rarefaction:
      p.T = 0.5;
      p.essential_range = {-1.0, 1.0};
      break;
    case PresetId::moving_shock:
      p.T = 0.5;
      p.essential_range = {0.0, 1.0};
      break;
    case PresetId::sine:
      p.T = 1.0;
      p.essential_range = {-1.0, 1.0};
      break;
  }
  p.flux = burgers_flux(p.essential_range);
  return p;
}

double ExperimentPreset::initial(double x) const {
  switch (id) {
    case PresetId::standing_shock:
      return x <= 0.0 ? 1.0 : -1.0;
    case PresetId::moving_shock:
      return x <= 0.0 ? 1.0 : 0.0;
    case PresetId::rarefaction:
      return x <= 0.0 ? -1.0 : 1.0;
    case PresetId::sine:
      return -std::sin(std::numbers::pi * x);
  }
  return 0.0;
}

double ExperimentPreset::boundary(double x, double t) const {
  if (x != domain.lo && x != domain.hi) throw ContractError("boundary data requested off the spatial boundary");
  if (id == PresetId::sine) return 0.0;
  return exact_solution(*this, x, t);
}

double exact_solution(const ExperimentPreset& preset, double x, double t) {
  if (preset.id == PresetId::sine) throw ContractError("exact_solution: no closed form for the sine preset");
  if (t < 0.0) throw ContractError("exact_solution: negative time");
  if (t == 0.0) return preset.initial(x);
  switch (preset.id) {
    case PresetId::standing_shock:
      return x <= 0.0 ? 1.0 : -1.0;
    case PresetId::moving_shock:
      return x <= 0.5 * t ? 1.0 : 0.0;
    case PresetId::rarefaction:
      if (x <= -t) return -1.0;
      if (x <= t) return x / t;
      return 1.0;
    case PresetId::sine:
      break;
  }
  return 0.0;
}

double sine_solution(double x, double t, double tol) {
  using std::numbers::pi;
  if (!(x >= -1.0 && x <= 1.0 && t >= 0.0 && t <= 1.0)) throw ContractError("sine_solution: point off domain");
  if (t == 0.0) return -std::sin(pi * x);
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -sine_solution(-x, t, tol);
  // Foot x0 of the characteristic through (x, t): x0 - t sin(pi x0) = x on the
  // branch where the map is increasing (right of its minimum once a shock has
  // formed at the origin).
  double lo = 0.0;
  if (pi * t > 1.0) lo = std::acos(1.0 / (pi * t)) / pi;
  double hi = 1.0;
  auto residual = [&](double x0) { return x0 - t * std::sin(pi * x0) - x; };
  double x0 = std::clamp(x + t * std::sin(pi * x), lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double r = residual(x0);
    if (std::abs(r) < tol) return -std::sin(pi * x0);
    if (r > 0.0)
      hi = x0;
    else
      lo = x0;
    const double slope = 1.0 - pi * t * std::cos(pi * x0);
    double next = slope > 0.0 ? x0 - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-300) return -std::sin(pi * x0);
    x0 = next;
  }
  throw OracleError("sine_solution: Newton iteration did not converge");
}

double FVGrid::sample(double x) const {
  const double s = (x - domain.lo) / dx - 0.5;
  if (s <= 0.0) return u.front();
  if (s >= n_cells - 1) return u.back();
  const int i = static_cast<int>(s);
  const double w = s - i;
  return (1.0 - w) * u[i] + w * u[i + 1];
}

double godunov_flux(const FluxSpec& flux, double ul, double ur) {
  if (ul <= ur) return flux.f(std::clamp(flux.sonic_point, ul, ur));
  return std::max(flux.f(ul), flux.f(ur));
}

FVProblem FVProblem::from_preset(const ExperimentPreset& preset) {
  return {preset.flux, preset.domain, [preset](double x) { return preset.initial(x); },
          [preset](double x, double t) { return preset.boundary(x, t); }};
}

FVGrid fv_solve(const ExperimentPreset& preset, int n_cells, double cfl, double t_end,
                const std::function<void(const FVStep&)>& on_step, std::span<const double> snapshot_times,
                const std::function<void(const FVGrid&)>& on_snapshot) {
  return fv_solve(FVProblem::from_preset(preset), n_cells, cfl, t_end, on_step, snapshot_times, on_snapshot);
}

FVGrid fv_solve(const FVProblem& problem, int n_cells, double cfl, double t_end,
                const std::function<void(const FVStep&)>& on_step, std::span<const double> snapshot_times,
                const std::function<void(const FVGrid&)>& on_snapshot) {
  if (n_cells < 16) throw ConfigError("fv_solve: need at least 16 cells");
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("fv_solve: cfl must lie in (0, 1)");
  if (!(t_end >= 0.0)) throw ConfigError("fv_solve: negative end time");

  FVGrid g;
  g.n_cells = n_cells;
  g.cfl = cfl;
  g.domain = problem.domain;
  g.dx = problem.domain.width() / n_cells;
  g.u.resize(n_cells);
  // 4-point Gauss-Legendre cell averages of u0.
  static constexpr double kNodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                       0.8611363115940526};
  static constexpr double kWeights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                         0.3478548451374538};
  for (int i = 0; i < n_cells; ++i) {
    double acc = 0.0;
    for (int q = 0; q < 4; ++q) acc += kWeights[q] * problem.initial(g.center(i) + 0.5 * g.dx * kNodes[q]);
    g.u[i] = 0.5 * acc;
  }

  std::vector<double> snaps(snapshot_times.begin(), snapshot_times.end());
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  std::size_t next_snap = 0;
  while (next_snap < snaps.size() && snaps[next_snap] <= 0.0) {
    if (on_snapshot) on_snapshot(g);
    ++next_snap;
  }

  std::vector<double> face(n_cells + 1);
  const FluxSpec& flux = problem.flux;
  while (g.time < t_end) {
    const double left = problem.boundary(problem.domain.lo, g.time);
    const double right = problem.boundary(problem.domain.hi, g.time);
    double smax = std::max(std::abs(flux.f_prime(left)), std::abs(flux.f_prime(right)));
    for (double v : g.u) smax = std::max(smax, std::abs(flux.f_prime(v)));
    double target = t_end;
    if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
    double dt = target - g.time;
    bool lands = true;
    if (smax > 0.0 && cfl * g.dx / smax < dt) {
      dt = cfl * g.dx / smax;
      lands = false;
    }
    face[0] = godunov_flux(flux, left, g.u[0]);
    for (int i = 1; i < n_cells; ++i) face[i] = godunov_flux(flux, g.u[i - 1], g.u[i]);
    face[n_cells] = godunov_flux(flux, g.u[n_cells - 1], right);

    double mass_before = 0.0, mass_after = 0.0, max_abs = 0.0;
    const double ratio = dt / g.dx;
    for (int i = 0; i < n_cells; ++i) {
      mass_before += g.u[i] * g.dx;
      g.u[i] -= ratio * (face[i + 1] - face[i]);
      mass_after += g.u[i] * g.dx;
      max_abs = std::max(max_abs, std::abs(g.u[i]));
    }
    g.time = lands ? target : g.time + dt;
    if (on_step) on_step({g.time, dt, mass_before, mass_after, face[0], face[n_cells], max_abs});
    while (next_snap < snaps.size() && snaps[next_snap] <= g.time) {
      if (on_snapshot) on_snapshot(g);
      ++next_snap;
    }
  }
  return g;
}

Field make_reference(const ExperimentPreset& preset, std::span<const double> times, int fv_cells) {
  if (preset.has_closed_form()) return [preset](double x, double t) { return exact_solution(preset, x, t); };
  auto snaps = std::make_shared<std::vector<std::pair<double, FVGrid>>>();
  const double t_end = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  fv_solve(preset, fv_cells, 0.5, t_end, {}, times, [&](const FVGrid& g) { snaps->emplace_back(g.time, g); });
  return [snaps, preset](double x, double t) {
    auto it = std::lower_bound(snaps->begin(), snaps->end(), t - 1e-12,
                               [](const auto& s, double v) { return s.first < v; });
    if (it == snaps->end() || std::abs(it->first - t) > 1e-12)
      throw ContractError("reference requested at a time without an FV snapshot");
    if (x == preset.domain.lo || x == preset.domain.hi) return preset.boundary(x, t);
    return it->second.sample(x);
  };
}

std::vector<double> error_time_nodes(const ExperimentPreset& preset, int quad_n) {
  const int nt = std::max(2, quad_n / 4);
  std::vector<double> t(nt);
  for (int j = 0; j < nt; ++j) t[j] = preset.T * j / (nt - 1);
  t.back() = preset.T;
  return t;
}

namespace {

std::vector<double> trapezoid_weights(int n, double h) {
  std::vector<double> w(n, h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

}  // namespace

RelativeErrors relative_errors(const Field& predictor, const ExperimentPreset& preset, const Field& reference,
                               int quad_n) {
  if (quad_n < 1000) throw ConfigError("relative_errors: quad_n must be at least 1000");
  const std::vector<double> tn = error_time_nodes(preset, quad_n);
  const Field ref = reference ? reference : make_reference(preset, tn);
  const double hx = preset.domain.width() / (quad_n - 1);
  const auto wx = trapezoid_weights(quad_n, hx);
  const auto wt = trapezoid_weights(static_cast<int>(tn.size()), preset.T / (tn.size() - 1));
  auto x_at = [&](int i) { return i == quad_n - 1 ? preset.domain.hi : preset.domain.lo + i * hx; };

  double num_T = 0.0, den_T = 0.0;
  for (int i = 0; i < quad_n; ++i) {
    const double x = x_at(i);
    const double r = ref(x, preset.T);
    num_T += wx[i] * std::abs(predictor(x, preset.T) - r);
    den_T += wx[i] * std::abs(r);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < tn.size(); ++j) {
    for (int i = 0; i < quad_n; ++i) {
      const double x = x_at(i);
      const double r = ref(x, tn[j]);
      num += wt[j] * wx[i] * std::abs(predictor(x, tn[j]) - r);
      den += wt[j] * wx[i] * std::abs(r);
    }
  }
  return {num_T / den_T, num / den};
}

}  // namespace wpinn
