#include "wpinn/boundary.hpp"

#include "wpinn/errors.hpp"

namespace wpinn {

double temporal_boundary_residual(const NetworkParams& u, const ExperimentPreset& preset, double x) {
  if (!preset.domain.contains(x)) throw ContractError("temporal boundary point outside the domain");
  return forward_jet(u, x, 0.0).value - preset.initial(x);
}

double spatial_boundary_residual(const NetworkParams& u, const ExperimentPreset& preset, double x, double t) {
  if (x != preset.domain.lo && x != preset.domain.hi) throw ContractError("spatial boundary point off the boundary");
  if (!(t >= 0.0 && t <= preset.T)) throw ContractError("spatial boundary point outside [0, T]");
  return forward_jet(u, x, t).value - preset.boundary(x, t);
}

double boundary_residual(const NetworkParams& u, const ExperimentPreset& preset, double x, double t) {
  if (t == 0.0) return temporal_boundary_residual(u, preset, x);
  return spatial_boundary_residual(u, preset, x, t);
}

}  // namespace wpinn
