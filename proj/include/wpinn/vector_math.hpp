#pragma once

// Elementwise activations over contiguous arrays, built so the compiler can
// call the vectorized libm variants. Accuracy is a few ulp, not correctly
// rounded; the scalar reference in network.cpp uses std:: functions.

#include <cstddef>

namespace wpinn::vmath {

void sin_cos(const double* z, double* s, double* c, std::size_t n);
void tanh(const double* z, double* a, std::size_t n);

}  // namespace wpinn::vmath
