#pragma once

// Burgers experiment presets and their reference solutions: closed forms for
// the Riemann problems, characteristics + Newton for the sine datum, and a
// first-order Godunov finite-volume solver.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wpinn/conservation.hpp"
#include "wpinn/sampling.hpp"

namespace wpinn {

enum class PresetId { standing_shock, moving_shock, rarefaction, sine };

PresetId parse_preset(std::string_view name);
std::string_view to_string(PresetId id);

struct ExperimentPreset {
  PresetId id = PresetId::standing_shock;
  Interval domain{-1.0, 1.0};
  double T = 0.5;
  FluxSpec flux;
  Interval essential_range;
  CollocationCounts counts;

  double initial(double x) const;
  /// Dirichlet data g(x, t) on x in {a, b}: the trace of the exact solution.
  double boundary(double x, double t) const;
  bool has_closed_form() const { return id != PresetId::sine; }
};

ExperimentPreset make_preset(PresetId id);

/// Closed-form entropy solution; the left state at a discontinuity.
/// Throws ContractError for the sine preset.
double exact_solution(const ExperimentPreset& preset, double x, double t);

/// Entropy solution for u0 = -sin(pi x) on [-1,1] by characteristics with a
/// safeguarded Newton iteration. Returns 0 on the stationary shock x = 0.
/// Throws OracleError if Newton does not converge within 100 iterations.
double sine_solution(double x, double t, double tol = 1e-13);

struct FVStep {
  double time;        // after the step
  double dt;
  double mass_before;  // sum u * dx
  double mass_after;
  double flux_in;   // numerical flux through the left face
  double flux_out;  // numerical flux through the right face
  double max_abs;
};

struct FVGrid {
  int n_cells = 0;
  double cfl = 0.5;
  Interval domain;
  double dx = 0.0;
  double time = 0.0;
  std::vector<double> u;  // cell averages

  double center(int i) const { return domain.lo + (i + 0.5) * dx; }
  /// Piecewise-linear interpolation between cell centres, constant in the
  /// outer half cells.
  double sample(double x) const;
};

/// Godunov flux of a convex flux function.
double godunov_flux(const FluxSpec& flux, double ul, double ur);

/// A conservation law on an interval with Dirichlet data.
struct FVProblem {
  FluxSpec flux;
  Interval domain;
  std::function<double(double)> initial;
  std::function<double(double, double)> boundary;  // g(x, t) for x in {a, b}

  static FVProblem from_preset(const ExperimentPreset& preset);
};

/// Godunov update to t_end with dt = cfl dx / max|f'(u)| and Dirichlet ghost
/// cells from the preset. Each step lands exactly on any pending time in
/// `snapshot_times`, where `on_snapshot` is invoked.
FVGrid fv_solve(const ExperimentPreset& preset, int n_cells, double cfl, double t_end,
                const std::function<void(const FVStep&)>& on_step = {}, std::span<const double> snapshot_times = {},
                const std::function<void(const FVGrid&)>& on_snapshot = {});
FVGrid fv_solve(const FVProblem& problem, int n_cells, double cfl, double t_end,
                const std::function<void(const FVStep&)>& on_step = {}, std::span<const double> snapshot_times = {},
                const std::function<void(const FVGrid&)>& on_snapshot = {});

/// A reference field u(x, t): closed form when available, otherwise FV
/// snapshots (2^14 cells, cfl 0.5) at the given times, interpolated in x.
using Field = std::function<double(double, double)>;
Field make_reference(const ExperimentPreset& preset, std::span<const double> times, int fv_cells = 16384);

struct RelativeErrors {
  double final_time;  // E_r^T
  double space_time;  // E_r
};

/// Composite-trapezoid relative L1 errors: quad_n nodes in x at t = T, and a
/// quad_n x quad_n/4 tensor grid over D x [0, T]. A null `reference` builds
/// one with make_reference.
RelativeErrors relative_errors(const Field& predictor, const ExperimentPreset& preset, const Field& reference = {},
                               int quad_n = 1000);

/// Time nodes used by relative_errors for a given quad_n.
std::vector<double> error_time_nodes(const ExperimentPreset& preset, int quad_n);

}  // namespace wpinn
