#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wpinn/network.hpp"

namespace wpinn::testing {

// |a - b| / max(|a|, |b|, floor): relative error with an absolute floor for
// quantities that are legitimately near zero.
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

template <typename F>
double central_diff(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Random architecture: depth 1..max_depth hidden layers, widths 1..max_width.
inline std::vector<int> random_widths(std::mt19937_64& rng, int max_depth, int max_width) {
  std::uniform_int_distribution<int> depth(1, max_depth), width(1, max_width);
  std::vector<int> w{2};
  for (int k = depth(rng); k > 0; --k) w.push_back(width(rng));
  w.push_back(1);
  return w;
}

// Glorot weights plus small random biases so the bias paths are exercised.
inline NetworkParams random_net(std::mt19937_64& rng, const std::vector<int>& widths, Activation act) {
  NetworkParams p = init_params(widths, act, rng());
  std::uniform_real_distribution<double> b(-0.5, 0.5);
  for (int k = 0; k < p.layout().num_layers(); ++k)
    for (int i = 0; i < p.layout().rows(k); ++i) p.bias(k)(i) = b(rng);
  return p;
}

}  // namespace wpinn::testing
