#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "wpinn/errors.hpp"
#include "wpinn/test_functions.hpp"

using namespace wpinn;
using wpinn::testing::central_diff;
using wpinn::testing::rel_err;

namespace {
const CutoffSpec spec = CutoffSpec::for_domain({-1.0, 1.0});
}

TEST_CASE("cutoff values") {
  CHECK(spec.ramp_width == doctest::Approx(0.2));
  const CutoffSpec narrow{{-1.0, 1.0}, 0.1};
  const CutoffValue end = cutoff(narrow, -1.0);
  CHECK(end.value == 0.0);
  CHECK(end.derivative == 0.0);
  CHECK(cutoff(narrow, 1.0).value == 0.0);
  const CutoffValue mid = cutoff(narrow, 0.0);
  CHECK(mid.value == 1.0);
  CHECK(mid.derivative == 0.0);
  const CutoffValue ramp = cutoff(narrow, -0.95);
  CHECK(ramp.value == doctest::Approx(0.5));
  CHECK(ramp.derivative == doctest::Approx(15.0));
  CHECK(cutoff(narrow, 0.95).derivative == doctest::Approx(-15.0));
  CHECK_THROWS_AS(cutoff(narrow, 1.5), ContractError);
  CHECK_THROWS_AS(CutoffSpec::for_domain({-1.0, 1.0}, 0.6), ConfigError);
}

TEST_CASE("cutoff is C1 and bounded") {
  for (int i = 0; i <= 2000; ++i) {
    const double x = -1.0 + i * 0.001;
    const CutoffValue w = cutoff(spec, x);
    CHECK(w.value >= 0.0);
    CHECK(w.value <= 1.0);
    if (i > 0 && i < 2000) {
      const double fd = central_diff([](double v) { return cutoff(spec, v).value; }, x, 1e-7);
      CHECK(std::abs(w.derivative - fd) < 1e-5);
    }
  }
}

TEST_CASE("neural test function") {
  std::mt19937_64 rng(4);
  const NetworkParams xi = wpinn::testing::random_net(rng, {2, 10, 10, 1}, Activation::tanh);
  for (double t : {0.0, 0.3, 1.0}) {
    CHECK(neural_test_fn(xi, spec, -1.0, t).value == 0.0);
    CHECK(neural_test_fn(xi, spec, 1.0, t).value == 0.0);
  }
  NetworkParams one(DenseLayout({2, 4, 1}), Activation::tanh);
  one.bias(1)(0) = 1.0;
  const Jet j = neural_test_fn(one, spec, 0.1, 0.4);
  CHECK(j.value == 1.0);
  CHECK(j.dx == 0.0);
  CHECK(j.dt == 0.0);

  for (double x : {-0.9, -0.3, 0.85}) {
    const double t = 0.37;
    const Jet g = neural_test_fn(xi, spec, x, t);
    auto f = [&](double a, double b) { return cutoff(spec, a).value * forward_jet(xi, a, b).value; };
    CHECK(rel_err(g.dx, central_diff([&](double v) { return f(v, t); }, x, 1e-5), 1e-6) < 1e-6);
    CHECK(rel_err(g.dt, central_diff([&](double v) { return f(x, v); }, t, 1e-5), 1e-6) < 1e-6);
  }
}

TEST_CASE("nonnegative neural test function is omega * xi^2") {
  std::mt19937_64 rng(5);
  const NetworkParams xi = wpinn::testing::random_net(rng, {2, 8, 8, 1}, Activation::sin);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.0, 1.0);
  for (int n = 0; n < 200; ++n) {
    const double x = ux(rng), t = ut(rng);
    const Jet g = neural_test_fn(xi, spec, x, t, TestSign::nonnegative);
    const double v = forward_jet(xi, x, t).value;
    CHECK(g.value >= 0.0);
    CHECK(g.value == doctest::Approx(cutoff(spec, x).value * v * v).epsilon(1e-14));
  }
  const double x = 0.93, t = 0.2;  // inside the ramp, so omega' contributes
  const Jet g = neural_test_fn(xi, spec, x, t, TestSign::nonnegative);
  auto f = [&](double a, double b) { return cutoff(spec, a).value * std::pow(forward_jet(xi, a, b).value, 2); };
  CHECK(rel_err(g.dx, central_diff([&](double v) { return f(v, t); }, x, 1e-5), 1e-6) < 1e-6);
  CHECK(rel_err(g.dt, central_diff([&](double v) { return f(x, v); }, t, 1e-5), 1e-6) < 1e-6);
  CHECK(parse_test_sign("nonnegative") == TestSign::nonnegative);
  CHECK(to_string(TestSign::any) == "any");
  CHECK(parse_test_sign(to_string(TestSign::automatic)) == TestSign::automatic);
  CHECK_THROWS_AS(neural_test_fn(xi, spec, x, t, TestSign::automatic), ConfigError);
  CHECK_THROWS_AS(parse_test_sign("positive"), ConfigError);
}

TEST_CASE("analytic test function") {
  const auto fn = AnalyticTestFn::make(0.4, 0.5, 0.2, 1.0);
  CHECK(fn.alpha() == doctest::Approx(3.0 * std::log(5.0) / 0.2));
  CHECK(fn.beta() == doctest::Approx(9.0 * std::log(5.0) / 0.008));

  const Jet centre = analytic_test_fn(fn, fn.y, fn.s);
  const double rho0 = std::tanh(fn.beta() * fn.delta()) / fn.delta();
  CHECK(rho(fn, 0.0).value == doctest::Approx(rho0).epsilon(1e-12));
  CHECK(centre.value == doctest::Approx(rho0 * rho0 * chi(fn, fn.s).value).epsilon(1e-12));
  CHECK(centre.dx == 0.0);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ux(0.0, 1.0), ut(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) CHECK(analytic_test_fn(fn, ux(rng), ut(rng)).value >= 0.0);

  CHECK_THROWS_AS(AnalyticTestFn::make(0.5, 0.5, 0.3, 1.0), ConfigError);  // T <= 4 eps
  CHECK_THROWS_AS(AnalyticTestFn::make(0.5, 0.5, 1.5, 10.0), ConfigError);

  // Saturated arguments far from the centre stay finite.
  const auto sharp = AnalyticTestFn::make(0.5, 0.5, 0.05, 1.0);
  const Jet far = analytic_test_fn(sharp, 0.0, 0.0);
  CHECK(std::isfinite(far.value));
  CHECK(std::isfinite(far.dx));
  CHECK(far.value == 0.0);
}

TEST_CASE("analytic jets match finite differences away from saturation") {
  const auto fn = AnalyticTestFn::make(0.5, 0.5, 0.4, 2.0);
  const double r = analytic_support_radius(fn);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.3 * r, 0.3 * r);
  const double h = 1e-4 / fn.beta();
  for (int i = 0; i < 200; ++i) {
    const double x = fn.y + u(rng), t = fn.s + u(rng);
    const Jet j = analytic_test_fn(fn, x, t);
    const double fx = central_diff([&](double v) { return analytic_test_fn(fn, v, t).value; }, x, h);
    const double ft = central_diff([&](double v) { return analytic_test_fn(fn, x, v).value; }, t, h);
    const double scale = std::max({std::abs(j.dx), std::abs(j.dt), 1e-3 * fn.beta() * j.value});
    CHECK(std::abs(j.dx - fx) / scale < 1e-5);
    CHECK(std::abs(j.dt - ft) / scale < 1e-5);
  }
}

TEST_CASE("chi endpoint and mollifier mass over the eps sweep") {
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto fn = AnalyticTestFn::make(0.5, 0.5, eps, 1.0);
    CHECK(chi(fn, eps).value <= eps);
    const double mass = mollifier_mass(fn);
    CHECK(mass >= 1.0 - eps);
    CHECK(mass <= 2.0 + 1e-12);
    // The exact mass over the real line is 2.
    CHECK(mass == doctest::Approx(2.0).epsilon(1e-12));
  }
}

TEST_CASE("seminorm scaling") {
  std::vector<double> r_inf, r_one;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto fn = AnalyticTestFn::make(0.5, 0.5, eps, 1.0);
    const double b = fn.beta();
    r_inf.push_back(seminorm_estimate(fn, INFINITY, 300) / (b * b * b));
    r_one.push_back(seminorm_estimate(fn, 1.0, 300) / b);
  }
  for (const auto* v : {&r_inf, &r_one}) {
    const auto [lo, hi] = std::minmax_element(v->begin(), v->end());
    CHECK(*lo > 0.0);
    CHECK(*hi / *lo <= 100.0);
  }
  const auto fn = AnalyticTestFn::make(0.5, 0.5, 0.2, 1.0);
  const double coarse = seminorm_estimate(fn, INFINITY, 200), fine = seminorm_estimate(fn, INFINITY, 400);
  CHECK(std::abs(fine - coarse) < 0.05 * fine);
  CHECK_THROWS_AS(seminorm_estimate(fn, 2.0, 50), ConfigError);
}

TEST_CASE("analytic family on the physical domain") {
  const auto fn = AnalyticTestFn::make(0.25, 0.25, 0.1, 0.5);
  const Jet a = analytic_test_fn_on(fn, {-1.0, 1.0}, -0.5, 0.25);
  const Jet b = analytic_test_fn(fn, 0.25, 0.25);
  CHECK(a.value == b.value);
  CHECK(a.dx == doctest::Approx(0.5 * b.dx));
}
