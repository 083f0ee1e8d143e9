#pragma once

// Min-max training of the solution network u_theta against the test network
// phi_eta = omega * xi_eta, ensembles over hyperparameter grids, and the
// retraining-averaged predictor.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wpinn/conservation.hpp"
#include "wpinn/kernels.hpp"
#include "wpinn/network.hpp"
#include "wpinn/optimizer.hpp"
#include "wpinn/oracles.hpp"
#include "wpinn/sampling.hpp"
#include "wpinn/test_functions.hpp"

namespace wpinn {

enum class ResidualKind { entropy, naive };

// Where lambda sits in the descent objective: `pde` minimizes
// lambda * J_max + J_u (the algorithm listing), `data` minimizes
// J_max + lambda * J_u (the loss definition).
enum class LambdaPlacement { pde, data };

ResidualKind parse_residual(std::string_view name);
std::string_view to_string(ResidualKind kind);
LambdaPlacement parse_lambda_placement(std::string_view name);
std::string_view to_string(LambdaPlacement p);

struct TrainingConfig {
  std::string label;
  int theta_hidden_layers = 4;
  int theta_width = 20;
  int eta_hidden_layers = 2;
  int eta_width = 10;
  Activation activation_theta = Activation::sin;
  Activation activation_eta = Activation::tanh;
  double lambda = 10.0;
  LambdaPlacement lambda_placement = LambdaPlacement::pde;
  double tau_theta = 0.01;
  double tau_eta = 0.015;
  int n_max = 8;
  int n_min = 1;
  int epochs = 5000;
  double reset_frequency = 0.05;
  int c_count = 10;
  std::optional<Interval> c_range;          // default: essential range widened by 10%
  std::optional<CollocationCounts> counts;  // default: the preset's
  SamplerKind sampler = SamplerKind::uniform;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double denominator_floor = 1e-10;
  ResidualKind residual = ResidualKind::entropy;
  TestSign test_sign = TestSign::any;
  double abs_eta = 0.0;
  double cutoff_fraction = 0.1;
  int kernel_threads = 1;

  /// round(r_f * N), at least 1.
  int reset_interval() const;
  /// Throws ConfigError on any out-of-range field.
  void validate() const;
  /// `automatic`: nonnegative for the entropy residual, any for the naive one.
  TestSign resolved_test_sign() const {
    if (test_sign != TestSign::automatic) return test_sign;
    return residual == ResidualKind::entropy ? TestSign::nonnegative : TestSign::any;
  }
};

/// splitmix64 of (seed, stream): independent seeds for parameters, resets and
/// collocation draws.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

CollocationSets make_collocation(const TrainingConfig& config, const ExperimentPreset& preset);
EntropyCSet make_c_grid(const TrainingConfig& config, const ExperimentPreset& preset);

struct PdeTerm {
  double value = 0.0;  // J_pde at c
  double c = 0.0;
  int c_index = 0;
  double residual_sum = 0.0;  // sum_m r_int(y_m, c)
  double denominator = 0.0;   // sum_m phi_x(y_m)^2 before flooring
  bool floored = false;       // denominator fell below the floor
};

/// Interior/boundary loss terms on a fixed collocation set. Works on jets so
/// the training loop can reuse network evaluations across steps.
class LossAssembler {
 public:
  LossAssembler(const TrainingConfig& config, const ExperimentPreset& preset, const CollocationSets& sets);

  const CollocationSets& sets() const { return sets_; }
  const EntropyCSet& c_grid() const { return c_grid_; }
  const CutoffSpec& cutoff_spec() const { return cutoff_; }

  /// phi = omega * xi (or omega * xi^2) at the interior points.
  void apply_cutoff(const JetColumns& xi, JetColumns& phi) const;
  /// Pulls phi cotangents back to xi cotangents.
  void pull_back_cutoff(const JetColumns& xi, const JetColumns& phi_cot, JetColumns& xi_cot) const;

  /// r_int(y_m, c) for every interior point (the naive integrand ignores c).
  void residuals(const JetColumns& u, const JetColumns& phi, double c, std::vector<double>& out) const;

  PdeTerm pde_term(const JetColumns& u, const JetColumns& phi, int c_index) const;
  /// max over the c grid; the first maximizer wins ties.
  PdeTerm pde_max(const JetColumns& u, const JetColumns& phi) const;

  /// Adds weight * dJ_pde/d(jets) for `term` into u_cot and/or phi_cot.
  void pde_cotangents(const JetColumns& u, const JetColumns& phi, const PdeTerm& term, double weight,
                      JetColumns* u_cot, JetColumns* phi_cot) const;

  /// J_u = sum r_tb^2 + sum r_sb^2 from network values at the tb and sb points.
  double data_term(const JetColumns& u_tb, const JetColumns& u_sb) const;
  void data_cotangents(const JetColumns& u_tb, const JetColumns& u_sb, double weight, JetColumns& tb_cot,
                       JetColumns& sb_cot) const;

  double pde_weight() const;
  double data_weight() const;

 private:
  TrainingConfig config_;
  ExperimentPreset preset_;
  CollocationSets sets_;
  EntropyCSet c_grid_;
  CutoffSpec cutoff_;
  std::vector<double> omega_, omega_dx_;
  std::vector<double> u0_tb_, g_sb_;
  std::vector<double> zeros_tb_;
};

/// Full objectives with parameter gradients; used by gradient checks and
/// available to callers that do not need step-to-step caching.
class LossProblem {
 public:
  LossProblem(const TrainingConfig& config, const ExperimentPreset& preset, const CollocationSets& sets);

  const LossAssembler& assembler() const { return assembler_; }

  /// J_max,C(theta, eta) and its eta-gradient.
  PdeTerm ascent_objective(const NetworkParams& theta, const NetworkParams& xi, GradientBuffer* grad_xi);
  /// pde_weight * J_max,C + data_weight * J_u and its theta-gradient.
  double descent_objective(const NetworkParams& theta, const NetworkParams& xi, GradientBuffer* grad_theta,
                           PdeTerm* pde = nullptr, double* data = nullptr);

 private:
  LossAssembler assembler_;
  int threads_;
  JetBatch theta_int_, theta_tb_, theta_sb_, xi_int_;
  JetColumns u_, phi_, xi_, u_tb_, u_sb_;
};

/// J_pde at one c: (ReLU(sum r_int))^2 / max(sum phi_x^2, floor).
PdeTerm loss_J_pde(const NetworkParams& theta, const NetworkParams& xi, const TrainingConfig& config,
                   const ExperimentPreset& preset, const CollocationSets& sets, double c);
double loss_J_u(const NetworkParams& theta, const TrainingConfig& config, const ExperimentPreset& preset,
                const CollocationSets& sets);
PdeTerm J_max_over_C(const NetworkParams& theta, const NetworkParams& xi, const TrainingConfig& config,
                     const ExperimentPreset& preset, const CollocationSets& sets);

struct EpochRecord {
  int epoch = 0;
  double j_pde = 0.0;
  double j_u = 0.0;
  double c_star = 0.0;
  bool reset = false;
  bool degenerate = false;  // test-function denominator hit the floor
};

struct TrainedModel {
  NetworkParams theta_star;
  NetworkParams eta_star;
  double c_star = 0.0;
  double final_training_error = 0.0;
  std::vector<EpochRecord> history;
  std::uint64_t seed = 0;
  TrainingConfig config;
  bool diverged = false;
  int diverged_epoch = -1;
  std::string failure;
};

/// Optional per-epoch observer (progress reporting).
using EpochObserver = std::function<void(const EpochRecord&)>;

/// Min-max training with test-network resets. Deterministic in config.seed.
/// A non-finite loss or gradient ends the run with diverged = true.
TrainedModel train_one(const TrainingConfig& config, const ExperimentPreset& preset,
                       const EpochObserver& observer = {});

/// sum_m r_int(y_m, c*)^2 + sum r_tb^2 + sum r_sb^2 at (theta*, eta*, c*).
double selection_criterion(const TrainedModel& model, const ExperimentPreset& preset, const CollocationSets& sets);

struct EnsembleResult {
  TrainingConfig config;
  std::vector<TrainedModel> runs;
  double mean_criterion = 0.0;  // over non-diverged runs
  int n_diverged = 0;
  bool usable() const { return n_diverged < static_cast<int>(runs.size()); }
};

struct EnsembleSelection {
  std::vector<EnsembleResult> per_config;
  int best_config = -1;
  const EnsembleResult& best() const { return per_config.at(best_config); }
};

struct EnsembleOptions {
  int threads = 1;
  std::uint64_t base_seed = 0;
  std::function<void(int config_index, int run_index, const TrainedModel&)> on_run_done;
};

/// Retrains each configuration n_theta times (run i: seed base_seed + i) and
/// selects the configuration with the lowest mean selection criterion.
/// Throws std::runtime_error if every configuration diverged.
EnsembleSelection run_ensemble(const std::vector<TrainingConfig>& grid, int n_theta, const ExperimentPreset& preset,
                               const EnsembleOptions& options = {});

struct MeanStd {
  double mean;
  double stddev;
};

/// Pointwise mean and sample standard deviation over non-diverged runs.
MeanStd average_predict(const EnsembleResult& ensemble, double x, double t);

/// Batched version over many points, same semantics.
void average_predict(const EnsembleResult& ensemble, std::span<const double> x, std::span<const double> t,
                     std::vector<double>& mean, std::vector<double>& stddev);

enum class GridId { single, table1, table2 };
GridId parse_grid(std::string_view name);

/// Cartesian products over L_theta, L_eta, sigma_eta, N_max and r_f; other
/// fields come from `base`.
std::vector<TrainingConfig> hyperparameter_grid(GridId grid, const TrainingConfig& base);

}  // namespace wpinn
