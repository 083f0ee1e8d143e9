#pragma once

// Fluxes, Kruzkhov entropy fluxes and the pointwise integrands of the
// entropy and weak-form residuals.

#include <functional>
#include <string>
#include <vector>

#include "wpinn/network.hpp"

namespace wpinn {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct FluxSpec {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  double lipschitz_const = 1.0;  // over `range`
  Interval range;
  // Minimizer of a convex flux; the Godunov flux needs it.
  double sonic_point = 0.0;
};

/// f(u) = u^2 / 2 with L_f = max |u| over `range`.
FluxSpec burgers_flux(Interval range);

/// Uniform grid of Kruzkhov constants c_0 < ... < c_{count-1}.
struct EntropyCSet {
  double c_min = 0.0;
  double c_max = 0.0;
  int count = 0;
  std::vector<double> values;

  static EntropyCSet uniform(double c_min, double c_max, int count);
  /// The essential range widened by `widen` * width on each side.
  static EntropyCSet around(Interval essential_range, int count = 10, double widen = 0.1);
};

struct SmoothedAbsConfig {
  double eta = 0.0;  // 0 selects |x| with sign subgradient
};

struct AbsValue {
  double value;
  double derivative;
};

/// sgn with sgn(0) = 0.
inline double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

double kruzkhov_q(const FluxSpec& flux, double u, double c);

/// d/du Q[u; c] away from u = c.
double kruzkhov_q_du(const FluxSpec& flux, double u, double c);

AbsValue smoothed_abs(SmoothedAbsConfig cfg, double x);
double smoothed_abs_second_derivative(SmoothedAbsConfig cfg, double x);

/// phi * d/dt|u - c| - Q[u; c] * phi_x.
double interior_integrand(const FluxSpec& flux, const Jet& u, const Jet& phi, double c, SmoothedAbsConfig cfg);

/// u_t * phi - f(u) * phi_x.
double naive_weak_integrand(const FluxSpec& flux, const Jet& u, const Jet& phi);

}  // namespace wpinn
