#pragma once

// Numerical sweeps of the analytic properties the method relies on: bounds of
// the smoothed absolute value, Lipschitz continuity and symmetry of the
// Kruzkhov flux, and the endpoint/mass/seminorm behaviour of the analytic test
// functions. Backs the `check-lemmas` command.

#include <cstdint>
#include <string>
#include <vector>

namespace wpinn {

struct LemmaCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<LemmaCheck> run_lemma_checks(std::uint64_t seed = 0);

}  // namespace wpinn
