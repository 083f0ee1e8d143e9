#include "wpinn/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "wpinn/conservation.hpp"
#include "wpinn/oracles.hpp"
#include "wpinn/test_functions.hpp"

namespace wpinn {

namespace {

constexpr double kEpsilons[] = {0.2, 0.1, 0.05};

LemmaCheck smoothed_abs_bounds(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-10.0, 10.0), ueta(0.0, 2.0), ulog(-12.0, 1.0);
  int failures = 0;
  double worst = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    // Mix O(1) samples with samples near the kink and tiny smoothing.
    const double x = i % 2 ? ux(rng) : std::copysign(std::pow(10.0, ulog(rng)), ux(rng));
    const double eta = i % 10 == 0 ? 0.0 : (i % 3 ? ueta(rng) : std::pow(10.0, ulog(rng)));
    const AbsValue a = smoothed_abs({eta}, x);
    const double gap = a.value - std::abs(x);
    const double slack = 4e-16 * (std::abs(x) + eta);
    if (gap < 0.0 || gap > eta + slack || std::abs(a.derivative) > 1.0) {
      ++failures;
      worst = std::max(worst, gap - eta);
    }
  }
  std::ostringstream d;
  d << n << " samples, " << failures << " violations";
  return {"smoothed-abs bounds 0 <= |x|_eta - |x| <= eta, |d/dx| <= 1", failures == 0, d.str()};
}

LemmaCheck q_lipschitz(std::mt19937_64& rng) {
  int failures = 0;
  double worst_ratio = 0.0;
  for (PresetId id : {PresetId::standing_shock, PresetId::moving_shock}) {
    const ExperimentPreset p = make_preset(id);
    std::uniform_real_distribution<double> u(p.essential_range.lo, p.essential_range.hi);
    for (int i = 0; i < 5000; ++i) {
      const double a = u(rng), b = u(rng), c = u(rng);
      const double lhs = std::abs(kruzkhov_q(p.flux, a, c) - kruzkhov_q(p.flux, b, c));
      const double bound = 3.0 * p.flux.lipschitz_const * std::abs(a - b);
      if (a != b) worst_ratio = std::max(worst_ratio, lhs / (p.flux.lipschitz_const * std::abs(a - b)));
      if (lhs > bound) ++failures;
    }
  }
  std::ostringstream d;
  d << "10000 triples, max |dQ| / (L_f |u - v|) = " << worst_ratio;
  return {"Kruzkhov flux Lipschitz factor <= 3 L_f", failures == 0, d.str()};
}

LemmaCheck q_symmetry(std::mt19937_64& rng) {
  const ExperimentPreset p = make_preset(PresetId::standing_shock);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int failures = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), c = i % 7 == 0 ? a : u(rng);
    if (kruzkhov_q(p.flux, a, c) != kruzkhov_q(p.flux, c, a)) ++failures;
  }
  return {"Kruzkhov flux symmetry Q[u;c] = Q[c;u]", failures == 0, "10000 pairs, " + std::to_string(failures) + " mismatches"};
}

LemmaCheck chi_endpoint() {
  bool ok = true;
  std::ostringstream d;
  for (double eps : kEpsilons) {
    const auto fn = AnalyticTestFn::make(0.5, 0.5, eps, 1.0);
    const double v = chi(fn, eps).value;
    ok = ok && v <= eps;
    d << "eps " << eps << ": chi(eps) = " << v << "; ";
  }
  return {"chi_eps(eps) <= eps", ok, d.str()};
}

LemmaCheck mollifier_mass_bounds() {
  bool ok = true;
  std::ostringstream d;
  for (double eps : kEpsilons) {
    const auto fn = AnalyticTestFn::make(0.5, 0.5, eps, 1.0);
    const double m = mollifier_mass(fn);
    // Quadrature roundoff allowance on the upper bound (the exact mass is 2).
    ok = ok && m >= 1.0 - eps && m <= 2.0 + 1e-12;
    d << "eps " << eps << ": mass = " << m << "; ";
  }
  return {"int rho_eps in [1 - eps, 2]", ok, d.str()};
}

LemmaCheck seminorm_band() {
  // The lemma gives only the order; the check is that the scaled seminorms stay
  // within a fixed factor-100 band across the sweep.
  std::vector<double> r_inf, r_one;
  std::ostringstream d;
  for (double eps : kEpsilons) {
    const auto fn = AnalyticTestFn::make(0.5, 0.5, eps, 1.0);
    const double b = fn.beta();
    r_inf.push_back(seminorm_estimate(fn, INFINITY, 400) / (b * b * b));
    r_one.push_back(seminorm_estimate(fn, 1.0, 400) / b);
    d << "eps " << eps << ": W1inf/beta^3 = " << r_inf.back() << ", W11/beta = " << r_one.back() << "; ";
  }
  auto band = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo > 0.0 && *hi / *lo <= 100.0;
  };
  return {"W^{1,inf} seminorm / beta^3 and W^{1,1} / beta bounded", band(r_inf) && band(r_one), d.str()};
}

}  // namespace

std::vector<LemmaCheck> run_lemma_checks(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LemmaCheck> out;
  out.push_back(smoothed_abs_bounds(rng));
  out.push_back(q_lipschitz(rng));
  out.push_back(q_symmetry(rng));
  out.push_back(chi_endpoint());
  out.push_back(mollifier_mass_bounds());
  out.push_back(seminorm_band());
  return out;
}

}  // namespace wpinn
