#include "wpinn/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wpinn/errors.hpp"

namespace wpinn {

ResidualKind parse_residual(std::string_view name) {
  if (name == "entropy") return ResidualKind::entropy;
  if (name == "naive") return ResidualKind::naive;
  throw ConfigError("unknown residual '" + std::string(name) + "'");
}

std::string_view to_string(ResidualKind kind) { return kind == ResidualKind::entropy ? "entropy" : "naive"; }

LambdaPlacement parse_lambda_placement(std::string_view name) {
  if (name == "pde") return LambdaPlacement::pde;
  if (name == "data") return LambdaPlacement::data;
  throw ConfigError("unknown lambda placement '" + std::string(name) + "'");
}

std::string_view to_string(LambdaPlacement p) { return p == LambdaPlacement::pde ? "pde" : "data"; }

int TrainingConfig::reset_interval() const {
  return std::max(1, static_cast<int>(std::lround(reset_frequency * epochs)));
}

void TrainingConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid training config: ") + what);
  };
  require(theta_hidden_layers >= 0 && theta_width > 0, "theta network shape");
  require(eta_hidden_layers >= 0 && eta_width > 0, "eta network shape");
  require(lambda > 0.0, "lambda must be positive");
  require(tau_theta > 0.0 && tau_eta > 0.0, "learning rates must be positive");
  require(n_max >= 0 && n_min >= 0, "step counts must be non-negative");
  require(epochs >= 0, "epochs must be non-negative");
  require(reset_frequency > 0.0 && reset_frequency <= 1.0, "reset frequency must lie in (0, 1]");
  require(c_count >= 1, "c grid needs at least one value");
  require(!c_range || c_range->hi >= c_range->lo, "c range is empty");
  require(denominator_floor > 0.0, "denominator floor must be positive");
  require(abs_eta >= 0.0, "abs smoothing must be non-negative");
  require(cutoff_fraction > 0.0 && cutoff_fraction < 0.5, "cutoff fraction must lie in (0, 0.5)");
  // The naive residual is an equality; one-signed test functions enforce only half of it.
  require(residual == ResidualKind::entropy || test_sign != TestSign::nonnegative,
          "a nonnegative test function needs the entropy residual");
  require(kernel_threads >= 1, "kernel threads must be at least 1");
  if (counts)
    require(counts->interior > 0 && counts->spatial_boundary > 0 && counts->temporal_boundary > 0,
            "collocation counts must be positive");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kThetaStream = 1;
constexpr std::uint64_t kEtaStream = 2;
constexpr std::uint64_t kCollocationStream = 3;
constexpr std::uint64_t kResetStreamBase = 1000;

// Both residuals read u_t of the solution and phi_x of the test function only.
constexpr Tangents kSolutionTangents = Tangents::t;
constexpr Tangents kTestTangents = Tangents::x;

}  // namespace

CollocationSets make_collocation(const TrainingConfig& config, const ExperimentPreset& preset) {
  const CollocationCounts counts = config.counts.value_or(preset.counts);
  if (config.sampler == SamplerKind::sobol) return sample_sobol(preset.domain, preset.T, counts);
  return sample_uniform(preset.domain, preset.T, counts, derive_seed(config.seed, kCollocationStream));
}

EntropyCSet make_c_grid(const TrainingConfig& config, const ExperimentPreset& preset) {
  if (config.c_range) return EntropyCSet::uniform(config.c_range->lo, config.c_range->hi, config.c_count);
  return EntropyCSet::around(preset.essential_range, config.c_count);
}

// ---------------------------------------------------------------------------

LossAssembler::LossAssembler(const TrainingConfig& config, const ExperimentPreset& preset,
                             const CollocationSets& sets)
    : config_(config),
      preset_(preset),
      sets_(sets),
      c_grid_(make_c_grid(config, preset)),
      cutoff_(CutoffSpec::for_domain(preset.domain, config.cutoff_fraction)) {
  if (sets_.interior_x.empty()) throw ConfigError("empty interior collocation set");
  const std::size_t n = sets_.interior_x.size();
  omega_.resize(n);
  omega_dx_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CutoffValue w = cutoff(cutoff_, sets_.interior_x[i]);
    omega_[i] = w.value;
    omega_dx_[i] = w.derivative;
  }
  u0_tb_.resize(sets_.initial_x.size());
  for (std::size_t i = 0; i < u0_tb_.size(); ++i) u0_tb_[i] = preset_.initial(sets_.initial_x[i]);
  g_sb_.resize(sets_.boundary_x.size());
  for (std::size_t i = 0; i < g_sb_.size(); ++i) g_sb_[i] = preset_.boundary(sets_.boundary_x[i], sets_.boundary_t[i]);
  zeros_tb_.assign(sets_.initial_x.size(), 0.0);
}

double LossAssembler::pde_weight() const {
  return config_.lambda_placement == LambdaPlacement::pde ? config_.lambda : 1.0;
}

double LossAssembler::data_weight() const {
  return config_.lambda_placement == LambdaPlacement::pde ? 1.0 : config_.lambda;
}

void LossAssembler::apply_cutoff(const JetColumns& xi, JetColumns& phi) const {
  const std::size_t n = xi.size();
  phi.resize(n);
  const bool square = config_.resolved_test_sign() == TestSign::nonnegative;
  for (std::size_t i = 0; i < n; ++i) {
    const Jet s = square ? square_jet(xi.at(i)) : xi.at(i);
    phi.value[i] = omega_[i] * s.value;
    phi.dx[i] = omega_dx_[i] * s.value + omega_[i] * s.dx;
    phi.dt[i] = omega_[i] * s.dt;
  }
}

void LossAssembler::pull_back_cutoff(const JetColumns& xi, const JetColumns& phi_cot, JetColumns& xi_cot) const {
  const std::size_t n = phi_cot.size();
  xi_cot.resize(n);
  const bool square = config_.resolved_test_sign() == TestSign::nonnegative;
  for (std::size_t i = 0; i < n; ++i) {
    const double cv = omega_[i] * phi_cot.value[i] + omega_dx_[i] * phi_cot.dx[i];
    const double cx = omega_[i] * phi_cot.dx[i];
    const double ct = omega_[i] * phi_cot.dt[i];
    if (square) {
      xi_cot.value[i] = 2.0 * (xi.value[i] * cv + xi.dx[i] * cx + xi.dt[i] * ct);
      xi_cot.dx[i] = 2.0 * xi.value[i] * cx;
      xi_cot.dt[i] = 2.0 * xi.value[i] * ct;
    } else {
      xi_cot.value[i] = cv;
      xi_cot.dx[i] = cx;
      xi_cot.dt[i] = ct;
    }
  }
}

void LossAssembler::residuals(const JetColumns& u, const JetColumns& phi, double c, std::vector<double>& out) const {
  const std::size_t n = u.size();
  out.resize(n);
  const SmoothedAbsConfig abs_cfg{config_.abs_eta};
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = config_.residual == ResidualKind::entropy
                 ? interior_integrand(preset_.flux, u.at(i), phi.at(i), c, abs_cfg)
                 : naive_weak_integrand(preset_.flux, u.at(i), phi.at(i));
  }
}

namespace {

double pde_value(ResidualKind kind, double sum, double denom) {
  if (kind == ResidualKind::entropy) {
    const double r = std::max(sum, 0.0);
    return r * r / denom;
  }
  return sum * sum / denom;
}

}  // namespace

PdeTerm LossAssembler::pde_term(const JetColumns& u, const JetColumns& phi, int c_index) const {
  PdeTerm term;
  term.c_index = c_index;
  term.c = config_.residual == ResidualKind::entropy ? c_grid_.values.at(c_index) : 0.0;
  std::vector<double> r;
  residuals(u, phi, term.c, r);
  double s = 0.0, d = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    s += r[i];
    d += phi.dx[i] * phi.dx[i];
  }
  term.residual_sum = s;
  term.denominator = d;
  term.floored = d < config_.denominator_floor;
  term.value = pde_value(config_.residual, s, std::max(d, config_.denominator_floor));
  return term;
}

PdeTerm LossAssembler::pde_max(const JetColumns& u, const JetColumns& phi) const {
  const std::size_t n = u.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) d += phi.dx[i] * phi.dx[i];
  const double denom = std::max(d, config_.denominator_floor);

  if (config_.residual == ResidualKind::naive) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += naive_weak_integrand(preset_.flux, u.at(i), phi.at(i));
    return {pde_value(ResidualKind::naive, s, denom), 0.0, 0, s, d, d < config_.denominator_floor};
  }

  // Sums for every c in one sweep; f(u) is shared across c.
  const auto& cs = c_grid_.values;
  const int nc = static_cast<int>(cs.size());
  std::vector<double> fc(nc), sums(nc, 0.0);
  for (int k = 0; k < nc; ++k) fc[k] = preset_.flux.f(cs[k]);
  const SmoothedAbsConfig abs_cfg{config_.abs_eta};
  for (std::size_t i = 0; i < n; ++i) {
    const double uv = u.value[i];
    const double fu = preset_.flux.f(uv);
    const double pv = phi.value[i] * u.dt[i];
    const double px = phi.dx[i];
    for (int k = 0; k < nc; ++k) {
      const double diff = uv - cs[k];
      const double da = abs_cfg.eta == 0.0 ? sgn(diff) : smoothed_abs(abs_cfg, diff).derivative;
      sums[k] += pv * da - sgn(diff) * (fu - fc[k]) * px;
    }
  }
  PdeTerm best;
  best.value = -1.0;
  for (int k = 0; k < nc; ++k) {
    const double v = pde_value(ResidualKind::entropy, sums[k], denom);
    if (v > best.value || std::isnan(v)) {
      best = {v, cs[k], k, sums[k], d, d < config_.denominator_floor};
      if (std::isnan(v)) break;
    }
  }
  return best;
}

void LossAssembler::pde_cotangents(const JetColumns& u, const JetColumns& phi, const PdeTerm& term, double weight,
                                   JetColumns* u_cot, JetColumns* phi_cot) const {
  const std::size_t n = u.size();
  const bool floored = term.denominator < config_.denominator_floor;
  const double denom = floored ? config_.denominator_floor : term.denominator;
  double dj_ds, dj_dd;
  const double s = term.residual_sum;
  if (config_.residual == ResidualKind::entropy && s <= 0.0) {
    dj_ds = 0.0;
    dj_dd = 0.0;
  } else {
    dj_ds = 2.0 * s / denom;
    dj_dd = floored ? 0.0 : -s * s / (denom * denom);
  }
  dj_ds *= weight;
  dj_dd *= weight;
  if (dj_ds == 0.0 && dj_dd == 0.0) return;

  const FluxSpec& flux = preset_.flux;
  const SmoothedAbsConfig abs_cfg{config_.abs_eta};
  const double c = term.c;
  for (std::size_t i = 0; i < n; ++i) {
    const double uv = u.value[i];
    double dr_du, dr_dut, dr_dphi, dr_dphix;
    if (config_.residual == ResidualKind::entropy) {
      const double diff = uv - c;
      const double da = smoothed_abs(abs_cfg, diff).derivative;
      const double dda = smoothed_abs_second_derivative(abs_cfg, diff);
      const double q = kruzkhov_q(flux, uv, c);
      dr_du = phi.value[i] * dda * u.dt[i] - kruzkhov_q_du(flux, uv, c) * phi.dx[i];
      dr_dut = phi.value[i] * da;
      dr_dphi = da * u.dt[i];
      dr_dphix = -q;
    } else {
      dr_du = -flux.f_prime(uv) * phi.dx[i];
      dr_dut = phi.value[i];
      dr_dphi = u.dt[i];
      dr_dphix = -flux.f(uv);
    }
    if (u_cot) {
      u_cot->value[i] += dj_ds * dr_du;
      u_cot->dt[i] += dj_ds * dr_dut;
    }
    if (phi_cot) {
      phi_cot->value[i] += dj_ds * dr_dphi;
      phi_cot->dx[i] += dj_ds * dr_dphix + dj_dd * 2.0 * phi.dx[i];
    }
  }
}

double LossAssembler::data_term(const JetColumns& u_tb, const JetColumns& u_sb) const {
  double s = 0.0;
  for (std::size_t i = 0; i < u_tb.size(); ++i) {
    const double r = u_tb.value[i] - u0_tb_[i];
    s += r * r;
  }
  for (std::size_t i = 0; i < u_sb.size(); ++i) {
    const double r = u_sb.value[i] - g_sb_[i];
    s += r * r;
  }
  return s;
}

void LossAssembler::data_cotangents(const JetColumns& u_tb, const JetColumns& u_sb, double weight,
                                    JetColumns& tb_cot, JetColumns& sb_cot) const {
  tb_cot.resize(u_tb.size());
  sb_cot.resize(u_sb.size());
  for (std::size_t i = 0; i < u_tb.size(); ++i) tb_cot.value[i] = 2.0 * weight * (u_tb.value[i] - u0_tb_[i]);
  for (std::size_t i = 0; i < u_sb.size(); ++i) sb_cot.value[i] = 2.0 * weight * (u_sb.value[i] - g_sb_[i]);
}

// ---------------------------------------------------------------------------

LossProblem::LossProblem(const TrainingConfig& config, const ExperimentPreset& preset, const CollocationSets& sets)
    : assembler_(config, preset, sets), threads_(config.kernel_threads) {}

PdeTerm LossProblem::ascent_objective(const NetworkParams& theta, const NetworkParams& xi, GradientBuffer* grad_xi) {
  const auto& s = assembler_.sets();
  theta_int_.forward(theta, s.interior_x, s.interior_t, kSolutionTangents, u_, threads_);
  xi_int_.forward(xi, s.interior_x, s.interior_t, kTestTangents, xi_, threads_);
  assembler_.apply_cutoff(xi_, phi_);
  const PdeTerm term = assembler_.pde_max(u_, phi_);
  if (grad_xi) {
    JetColumns phi_cot, xi_cot;
    phi_cot.resize(phi_.size());
    assembler_.pde_cotangents(u_, phi_, term, 1.0, nullptr, &phi_cot);
    assembler_.pull_back_cutoff(xi_, phi_cot, xi_cot);
    xi_int_.backward(xi, xi_cot, *grad_xi, threads_);
  }
  return term;
}

double LossProblem::descent_objective(const NetworkParams& theta, const NetworkParams& xi,
                                      GradientBuffer* grad_theta, PdeTerm* pde, double* data) {
  const auto& s = assembler_.sets();
  const std::vector<double> zeros(s.initial_x.size(), 0.0);
  theta_int_.forward(theta, s.interior_x, s.interior_t, kSolutionTangents, u_, threads_);
  xi_int_.forward(xi, s.interior_x, s.interior_t, kTestTangents, xi_, threads_);
  assembler_.apply_cutoff(xi_, phi_);
  theta_tb_.forward(theta, s.initial_x, zeros, Tangents::none, u_tb_, threads_);
  theta_sb_.forward(theta, s.boundary_x, s.boundary_t, Tangents::none, u_sb_, threads_);
  const PdeTerm term = assembler_.pde_max(u_, phi_);
  const double ju = assembler_.data_term(u_tb_, u_sb_);
  if (pde) *pde = term;
  if (data) *data = ju;
  const double wp = assembler_.pde_weight();
  const double wd = assembler_.data_weight();
  if (grad_theta) {
    JetColumns u_cot, tb_cot, sb_cot;
    u_cot.resize(u_.size());
    assembler_.pde_cotangents(u_, phi_, term, wp, &u_cot, nullptr);
    theta_int_.backward(theta, u_cot, *grad_theta, threads_);
    assembler_.data_cotangents(u_tb_, u_sb_, wd, tb_cot, sb_cot);
    GradientBuffer g(theta.layout());
    theta_tb_.backward(theta, tb_cot, g, threads_);
    *grad_theta += g;
    theta_sb_.backward(theta, sb_cot, g, threads_);
    *grad_theta += g;
  }
  return wp * term.value + wd * ju;
}

PdeTerm loss_J_pde(const NetworkParams& theta, const NetworkParams& xi, const TrainingConfig& config,
                   const ExperimentPreset& preset, const CollocationSets& sets, double c) {
  TrainingConfig cfg = config;
  cfg.c_range = Interval{c, c};
  cfg.c_count = 1;
  LossProblem problem(cfg, preset, sets);
  return problem.ascent_objective(theta, xi, nullptr);
}

double loss_J_u(const NetworkParams& theta, const TrainingConfig& config, const ExperimentPreset& preset,
                const CollocationSets& sets) {
  const LossAssembler assembler(config, preset, sets);
  JetBatch tb, sb;
  JetColumns u_tb, u_sb;
  const std::vector<double> zeros(sets.initial_x.size(), 0.0);
  tb.forward(theta, sets.initial_x, zeros, Tangents::none, u_tb, config.kernel_threads);
  sb.forward(theta, sets.boundary_x, sets.boundary_t, Tangents::none, u_sb, config.kernel_threads);
  return assembler.data_term(u_tb, u_sb);
}

PdeTerm J_max_over_C(const NetworkParams& theta, const NetworkParams& xi, const TrainingConfig& config,
                     const ExperimentPreset& preset, const CollocationSets& sets) {
  LossProblem problem(config, preset, sets);
  return problem.ascent_objective(theta, xi, nullptr);
}

// ---------------------------------------------------------------------------

namespace {

void require_finite(double v, int epoch, const char* what) {
  if (!std::isfinite(v)) throw TrainingDiverged(epoch, std::string("non-finite ") + what);
}

}  // namespace

TrainedModel train_one(const TrainingConfig& config, const ExperimentPreset& preset, const EpochObserver& observer) {
  config.validate();
  const CollocationSets sets = make_collocation(config, preset);
  const LossAssembler assembler(config, preset, sets);
  const int threads = config.kernel_threads;

  const auto widths_theta = make_widths(config.theta_hidden_layers, config.theta_width);
  const auto widths_eta = make_widths(config.eta_hidden_layers, config.eta_width);
  NetworkParams theta = init_params(widths_theta, config.activation_theta, derive_seed(config.seed, kThetaStream));
  NetworkParams xi = init_params(widths_eta, config.activation_eta, derive_seed(config.seed, kEtaStream));
  OptimizerState opt_theta = OptimizerState::make(config.optimizer, config.tau_theta, theta.size());
  OptimizerState opt_eta = OptimizerState::make(config.optimizer, config.tau_eta, xi.size());

  TrainedModel model;
  model.seed = config.seed;
  model.config = config;
  model.history.reserve(config.epochs);

  JetBatch theta_int, theta_tb, theta_sb, xi_int;
  JetColumns u, xi_jets, phi, u_tb, u_sb, u_cot, phi_cot, xi_cot, tb_cot, sb_cot;
  GradientBuffer g_theta(theta.layout()), g_eta(xi.layout()), g_tmp(theta.layout());
  const std::vector<double> zeros(sets.initial_x.size(), 0.0);
  const double wp = assembler.pde_weight();
  const double wd = assembler.data_weight();
  const int interval = config.reset_interval();
  std::uint64_t resets = 0;

  auto eval_phi = [&] {
    xi_int.forward(xi, sets.interior_x, sets.interior_t, kTestTangents, xi_jets, threads);
    assembler.apply_cutoff(xi_jets, phi);
  };
  auto eval_boundary = [&] {
    theta_tb.forward(theta, sets.initial_x, zeros, Tangents::none, u_tb, threads);
    theta_sb.forward(theta, sets.boundary_x, sets.boundary_t, Tangents::none, u_sb, threads);
  };

  try {
    for (int e = 1; e <= config.epochs; ++e) {
      EpochRecord rec;
      rec.epoch = e;
      if (e % interval == 0) {
        xi = init_params(widths_eta, config.activation_eta, derive_seed(config.seed, kResetStreamBase + ++resets));
        opt_eta.reset();
        rec.reset = true;
      }
      theta_int.forward(theta, sets.interior_x, sets.interior_t, kSolutionTangents, u, threads);
      bool theta_current = true;
      PdeTerm term;
      bool have_term = false;

      for (int k = 0; k < config.n_max; ++k) {
        eval_phi();
        term = assembler.pde_max(u, phi);
        have_term = true;
        require_finite(term.value, e, "J_pde");
        phi_cot.resize(phi.size());
        assembler.pde_cotangents(u, phi, term, 1.0, nullptr, &phi_cot);
        assembler.pull_back_cutoff(xi_jets, phi_cot, xi_cot);
        xi_int.backward(xi, xi_cot, g_eta, threads);
        optimizer_step(xi, g_eta, opt_eta, Direction::ascend, e);
      }

      double ju = 0.0;
      bool have_ju = false;
      for (int k = 0; k < config.n_min; ++k) {
        if (!theta_current) theta_int.forward(theta, sets.interior_x, sets.interior_t, kSolutionTangents, u, threads);
        eval_phi();
        eval_boundary();
        term = assembler.pde_max(u, phi);
        have_term = true;
        ju = assembler.data_term(u_tb, u_sb);
        have_ju = true;
        require_finite(wp * term.value + wd * ju, e, "descent loss");
        u_cot.resize(u.size());
        assembler.pde_cotangents(u, phi, term, wp, &u_cot, nullptr);
        theta_int.backward(theta, u_cot, g_theta, threads);
        assembler.data_cotangents(u_tb, u_sb, wd, tb_cot, sb_cot);
        theta_tb.backward(theta, tb_cot, g_tmp, threads);
        g_theta += g_tmp;
        theta_sb.backward(theta, sb_cot, g_tmp, threads);
        g_theta += g_tmp;
        optimizer_step(theta, g_theta, opt_theta, Direction::descend, e);
        theta_current = false;
      }

      if (!have_term) {
        eval_phi();
        term = assembler.pde_max(u, phi);
      }
      if (!have_ju) {
        eval_boundary();
        ju = assembler.data_term(u_tb, u_sb);
      }
      rec.j_pde = term.value;
      rec.j_u = ju;
      rec.c_star = term.c;
      rec.degenerate = term.floored;
      model.history.push_back(rec);
      if (observer) observer(rec);
    }
  } catch (const TrainingDiverged& err) {
    model.diverged = true;
    model.diverged_epoch = err.epoch();
    model.failure = err.what();
  }

  model.theta_star = theta;
  model.eta_star = xi;
  if (!model.diverged) {
    theta_int.forward(theta, sets.interior_x, sets.interior_t, kSolutionTangents, u, threads);
    eval_phi();
    const PdeTerm final_term = assembler.pde_max(u, phi);
    model.c_star = final_term.c;
    model.final_training_error = selection_criterion(model, preset, sets);
    if (!std::isfinite(model.final_training_error)) {
      model.diverged = true;
      model.diverged_epoch = config.epochs;
      model.failure = "non-finite training error";
    }
  } else {
    model.final_training_error = std::numeric_limits<double>::infinity();
  }
  return model;
}

double selection_criterion(const TrainedModel& model, const ExperimentPreset& preset, const CollocationSets& sets) {
  const LossAssembler assembler(model.config, preset, sets);
  const int threads = model.config.kernel_threads;
  JetBatch theta_int, xi_int, tb, sb;
  JetColumns u, xi, phi, u_tb, u_sb;
  theta_int.forward(model.theta_star, sets.interior_x, sets.interior_t, kSolutionTangents, u, threads);
  xi_int.forward(model.eta_star, sets.interior_x, sets.interior_t, kTestTangents, xi, threads);
  assembler.apply_cutoff(xi, phi);
  std::vector<double> r;
  assembler.residuals(u, phi, model.c_star, r);
  double s = 0.0;
  for (double v : r) s += v * v;
  const std::vector<double> zeros(sets.initial_x.size(), 0.0);
  tb.forward(model.theta_star, sets.initial_x, zeros, Tangents::none, u_tb, threads);
  sb.forward(model.theta_star, sets.boundary_x, sets.boundary_t, Tangents::none, u_sb, threads);
  return s + assembler.data_term(u_tb, u_sb);
}

// ---------------------------------------------------------------------------

EnsembleSelection run_ensemble(const std::vector<TrainingConfig>& grid, int n_theta, const ExperimentPreset& preset,
                               const EnsembleOptions& options) {
  if (grid.empty()) throw ConfigError("run_ensemble: empty configuration grid");
  if (n_theta < 1) throw ConfigError("run_ensemble: n_theta must be at least 1");
  for (const auto& cfg : grid) cfg.validate();

  EnsembleSelection sel;
  sel.per_config.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sel.per_config[i].config = grid[i];
    sel.per_config[i].runs.resize(n_theta);
  }
  const std::size_t jobs = grid.size() * static_cast<std::size_t>(n_theta);
  const int workers = std::max(1, std::min<int>(options.threads, static_cast<int>(jobs)));
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;
  auto work = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const int ci = static_cast<int>(job / n_theta);
      const int ri = static_cast<int>(job % n_theta);
      TrainingConfig cfg = grid[ci];
      cfg.seed = options.base_seed + static_cast<std::uint64_t>(ri);
      if (workers > 1) cfg.kernel_threads = 1;
      sel.per_config[ci].runs[ri] = train_one(cfg, preset);
      if (options.on_run_done) {
        std::lock_guard lock(report_mutex);
        options.on_run_done(ci, ri, sel.per_config[ci].runs[ri]);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sel.per_config.size(); ++i) {
    auto& res = sel.per_config[i];
    double sum = 0.0;
    int ok = 0;
    res.n_diverged = 0;
    for (const auto& run : res.runs) {
      if (run.diverged) {
        ++res.n_diverged;
        continue;
      }
      sum += run.final_training_error;
      ++ok;
    }
    res.mean_criterion = ok > 0 ? sum / ok : std::numeric_limits<double>::infinity();
    if (ok > 0 && res.mean_criterion < best) {
      best = res.mean_criterion;
      sel.best_config = static_cast<int>(i);
    }
  }
  if (sel.best_config < 0) throw std::runtime_error("ensemble failed: every configuration diverged");
  return sel;
}

MeanStd average_predict(const EnsembleResult& ensemble, double x, double t) {
  std::vector<double> values;
  for (const auto& run : ensemble.runs)
    if (!run.diverged) values.push_back(forward_jet(run.theta_star, x, t).value);
  if (values.empty()) throw ContractError("average_predict: no usable runs");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  if (values.size() > 1) {
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
  }
  return {mean, std::sqrt(var)};
}

void average_predict(const EnsembleResult& ensemble, std::span<const double> x, std::span<const double> t,
                     std::vector<double>& mean, std::vector<double>& stddev) {
  std::vector<const TrainedModel*> usable;
  for (const auto& run : ensemble.runs)
    if (!run.diverged) usable.push_back(&run);
  if (usable.empty()) throw ContractError("average_predict: no usable runs");
  const std::size_t n = x.size();
  std::vector<std::vector<double>> values(usable.size());
  JetBatch batch;
  JetColumns out;
  for (std::size_t r = 0; r < usable.size(); ++r) {
    batch.forward(usable[r]->theta_star, x, t, Tangents::none, out, usable[r]->config.kernel_threads);
    values[r] = out.value;
  }
  mean.assign(n, 0.0);
  stddev.assign(n, 0.0);
  const double m = static_cast<double>(usable.size());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (const auto& v : values) s += v[i];
    mean[i] = s / m;
    if (usable.size() > 1) {
      double q = 0.0;
      for (const auto& v : values) q += (v[i] - mean[i]) * (v[i] - mean[i]);
      stddev[i] = std::sqrt(q / (m - 1.0));
    }
  }
}

GridId parse_grid(std::string_view name) {
  if (name == "single") return GridId::single;
  if (name == "table1") return GridId::table1;
  if (name == "table2") return GridId::table2;
  throw ConfigError("unknown grid '" + std::string(name) + "'");
}

std::vector<TrainingConfig> hyperparameter_grid(GridId grid, const TrainingConfig& base) {
  if (grid == GridId::single) return {base};
  const std::vector<double> rf = grid == GridId::table1 ? std::vector<double>{0.001, 0.005, 0.025, 0.05}
                                                        : std::vector<double>{0.025, 0.05, 0.25};
  std::vector<TrainingConfig> out;
  for (int lt : {4, 6})
    for (int le : {2, 4})
      for (Activation ae : {Activation::sin, Activation::tanh})
        for (int nmax : {6, 8})
          for (double r : rf) {
            TrainingConfig c = base;
            c.theta_hidden_layers = lt;
            c.eta_hidden_layers = le;
            c.activation_eta = ae;
            c.n_max = nmax;
            c.reset_frequency = r;
            std::ostringstream label;
            label << "Lt" << lt << "-Le" << le << '-' << to_string(ae) << "-Nmax" << nmax << "-rf" << r;
            c.label = label.str();
            out.push_back(std::move(c));
          }
  return out;
}

}  // namespace wpinn
