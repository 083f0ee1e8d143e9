#pragma once

#include "wpinn/network.hpp"
#include "wpinn/oracles.hpp"

namespace wpinn {

/// u_theta(x, 0) - u0(x) for x in D.
double temporal_boundary_residual(const NetworkParams& u, const ExperimentPreset& preset, double x);

/// u_theta(x, t) - g(x, t) for x in {a, b}.
double spatial_boundary_residual(const NetworkParams& u, const ExperimentPreset& preset, double x, double t);

/// Dispatches on the point: t == 0 is the temporal boundary, x in {a, b} the
/// spatial one; any other point is a ContractError.
double boundary_residual(const NetworkParams& u, const ExperimentPreset& preset, double x, double t);

}  // namespace wpinn
