#include "wpinn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wpinn/errors.hpp"

namespace wpinn {

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "gd" || name == "plain_gd") return OptimizerKind::plain_gd;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "plain_gd"; }

OptimizerState OptimizerState::make(OptimizerKind kind, double learning_rate, std::size_t n_params) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  OptimizerState s;
  s.kind = kind;
  s.learning_rate = learning_rate;
  if (kind == OptimizerKind::adam) {
    s.first_moment.assign(n_params, 0.0);
    s.second_moment.assign(n_params, 0.0);
  }
  return s;
}

void OptimizerState::reset() {
  step_count = 0;
  std::fill(first_moment.begin(), first_moment.end(), 0.0);
  std::fill(second_moment.begin(), second_moment.end(), 0.0);
}

void optimizer_step(NetworkParams& params, const GradientBuffer& grads, OptimizerState& state, Direction direction,
                    int epoch) {
  auto p = params.values();
  const auto g = grads.values();
  if (p.size() != g.size()) throw ContractError("optimizer_step: gradient shape mismatch");
  if (!grads.all_finite()) throw TrainingDiverged(epoch, "non-finite gradient");
  const double sign = direction == Direction::descend ? -1.0 : 1.0;
  ++state.step_count;
  if (state.kind == OptimizerKind::plain_gd) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += sign * state.learning_rate * g[i];
    return;
  }
  if (state.first_moment.size() != p.size()) throw ContractError("optimizer_step: moment shape mismatch");
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < p.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g[i];
    v = state.beta2 * v + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    p[i] += sign * state.learning_rate * m_hat / (std::sqrt(v_hat) + state.eps_adam);
  }
}

}  // namespace wpinn
