#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "wpinn/conservation.hpp"

namespace wpinn {

struct CollocationCounts {
  int interior = 16384;
  int spatial_boundary = 4096;
  int temporal_boundary = 4096;
};

/// Fixed training set; coordinates stored column-wise for the kernels.
struct CollocationSets {
  std::vector<double> interior_x, interior_t;
  std::vector<double> boundary_x, boundary_t;  // x is exactly a or b
  std::vector<double> initial_x;               // t = 0
};

enum class SamplerKind { uniform, sobol };
SamplerKind parse_sampler(std::string_view name);
std::string_view to_string(SamplerKind kind);

/// Sobol points in [0,1)^dim, dim in {1, 2}, natural (non Gray-code) order so
/// that coordinate 0 is exactly the base-2 van der Corput sequence.
class SobolSequence {
 public:
  static constexpr int kBits = 32;

  explicit SobolSequence(int dimension);

  int dimension() const { return dimension_; }
  std::uint64_t index() const { return index_; }

  /// Point with the given index (index 0 is the origin).
  std::array<double, 2> point(std::uint64_t index) const;

  /// Advances to the next index and returns its point; the first call yields
  /// index 1. Throws SequenceExhausted past 2^32 - 1.
  std::array<double, 2> next();

 private:
  int dimension_;
  std::uint64_t index_ = 0;
  std::array<std::array<std::uint32_t, kBits>, 2> direction_{};
};

CollocationSets sample_uniform(Interval domain, double T, CollocationCounts counts, std::uint64_t seed);
CollocationSets sample_sobol(Interval domain, double T, CollocationCounts counts);

/// CSV with header "kind,x,t"; kind is interior, spatial_boundary or
/// temporal_boundary.
void write_collocation_csv(const CollocationSets& sets, std::ostream& out);

}  // namespace wpinn
