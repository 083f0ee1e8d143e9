#include "wpinn/conservation.hpp"

#include <algorithm>
#include <cmath>

#include "wpinn/errors.hpp"

namespace wpinn {

FluxSpec burgers_flux(Interval range) {
  FluxSpec flux;
  flux.name = "burgers";
  flux.f = [](double u) { return 0.5 * u * u; };
  flux.f_prime = [](double u) { return u; };
  flux.lipschitz_const = std::max(std::abs(range.lo), std::abs(range.hi));
  flux.range = range;
  flux.sonic_point = 0.0;
  return flux;
}

EntropyCSet EntropyCSet::uniform(double c_min, double c_max, int count) {
  if (count < 1) throw ConfigError("entropy constant grid needs at least one value");
  if (count > 1 && !(c_max > c_min)) throw ConfigError("entropy constant grid needs c_min < c_max");
  EntropyCSet set;
  set.c_min = c_min;
  set.c_max = count == 1 ? c_min : c_max;
  set.count = count;
  set.values.resize(count);
  for (int i = 0; i < count; ++i)
    set.values[i] = count == 1 ? c_min : c_min + (c_max - c_min) * static_cast<double>(i) / (count - 1);
  if (count > 1) set.values.back() = c_max;
  return set;
}

EntropyCSet EntropyCSet::around(Interval essential_range, int count, double widen) {
  const double pad = widen * essential_range.width();
  return uniform(essential_range.lo - pad, essential_range.hi + pad, count);
}

double kruzkhov_q(const FluxSpec& flux, double u, double c) { return sgn(u - c) * (flux.f(u) - flux.f(c)); }

double kruzkhov_q_du(const FluxSpec& flux, double u, double c) { return sgn(u - c) * flux.f_prime(u); }

AbsValue smoothed_abs(SmoothedAbsConfig cfg, double x) {
  if (cfg.eta == 0.0) return {std::abs(x), sgn(x)};
  const double r = std::hypot(x, cfg.eta);
  return {r, x / r};
}

double smoothed_abs_second_derivative(SmoothedAbsConfig cfg, double x) {
  if (cfg.eta == 0.0) return 0.0;
  const double r = std::hypot(x, cfg.eta);
  return cfg.eta * cfg.eta / (r * r * r);
}

double interior_integrand(const FluxSpec& flux, const Jet& u, const Jet& phi, double c, SmoothedAbsConfig cfg) {
  const double dabs_dt = smoothed_abs(cfg, u.value - c).derivative * u.dt;
  return phi.value * dabs_dt - kruzkhov_q(flux, u.value, c) * phi.dx;
}

double naive_weak_integrand(const FluxSpec& flux, const Jet& u, const Jet& phi) {
  return u.dt * phi.value - flux.f(u.value) * phi.dx;
}

}  // namespace wpinn
