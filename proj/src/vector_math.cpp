// Compiled with -ffast-math (see CMakeLists) so these loops map onto libmvec.

#include "wpinn/vector_math.hpp"

#include <cmath>

namespace wpinn::vmath {

void sin_cos(const double* z, double* s, double* c, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::sin(z[i]);
    c[i] = std::cos(z[i]);
  }
}

void tanh(const double* z, double* a, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) a[i] = std::tanh(z[i]);
}

}  // namespace wpinn::vmath
