#pragma once

#include <string_view>
#include <vector>

#include "wpinn/network.hpp"

namespace wpinn {

enum class OptimizerKind { plain_gd, adam };
enum class Direction { descend, ascend };

OptimizerKind parse_optimizer(std::string_view name);
std::string_view to_string(OptimizerKind kind);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  long step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::vector<double> first_moment, second_moment;

  static OptimizerState make(OptimizerKind kind, double learning_rate, std::size_t n_params);
  /// Forget moments and step count (used when the test network is redrawn).
  void reset();
};

/// One gradient step. Plain GD: p -/+= lr * g. Adam: bias-corrected moment
/// update, sign flipped for ascent. Throws TrainingDiverged(epoch) if any
/// gradient entry is non-finite; parameters are left untouched in that case.
void optimizer_step(NetworkParams& params, const GradientBuffer& grads, OptimizerState& state, Direction direction,
                    int epoch = 0);

}  // namespace wpinn
