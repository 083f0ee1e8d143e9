#include "wpinn/sampling.hpp"

#include <iomanip>
#include <ostream>
#include <random>
#include <string>

#include "wpinn/errors.hpp"

namespace wpinn {

SamplerKind parse_sampler(std::string_view name) {
  if (name == "uniform") return SamplerKind::uniform;
  if (name == "sobol") return SamplerKind::sobol;
  throw ConfigError("unknown sampler '" + std::string(name) + "'");
}

std::string_view to_string(SamplerKind kind) { return kind == SamplerKind::uniform ? "uniform" : "sobol"; }

SobolSequence::SobolSequence(int dimension) : dimension_(dimension) {
  if (dimension < 1 || dimension > 2) throw ConfigError("SobolSequence supports dimensions 1 and 2");
  // Coordinate 0: m_k = 1. Coordinate 1: primitive polynomial x + 1, m_1 = 1,
  // m_k = 2 m_{k-1} xor m_{k-1}.
  std::uint32_t m = 1;
  for (int k = 0; k < kBits; ++k) {
    direction_[0][k] = 1u << (kBits - 1 - k);
    if (k > 0) m = (m << 1) ^ m;
    direction_[1][k] = m << (kBits - 1 - k);
  }
}

std::array<double, 2> SobolSequence::point(std::uint64_t index) const {
  if (index >= (std::uint64_t{1} << kBits)) throw SequenceExhausted("Sobol index exceeds 2^32 - 1");
  std::array<double, 2> p{0.0, 0.0};
  for (int d = 0; d < dimension_; ++d) {
    std::uint32_t x = 0;
    for (int k = 0; k < kBits; ++k)
      if ((index >> k) & 1u) x ^= direction_[d][k];
    p[d] = static_cast<double>(x) / 4294967296.0;
  }
  return p;
}

std::array<double, 2> SobolSequence::next() {
  const auto p = point(index_ + 1);
  ++index_;
  return p;
}

namespace {

void check_counts(CollocationCounts c) {
  if (c.interior <= 0 || c.spatial_boundary <= 0 || c.temporal_boundary <= 0)
    throw ConfigError("collocation counts must be positive");
}

// Spatial boundary faces: the first ceil(M/2) points go to x = a.
void place_boundary(CollocationSets& s, Interval domain, int count, auto&& next_time) {
  const int left = count - count / 2;
  s.boundary_x.reserve(count);
  s.boundary_t.reserve(count);
  for (int i = 0; i < count; ++i) {
    s.boundary_x.push_back(i < left ? domain.lo : domain.hi);
    s.boundary_t.push_back(next_time());
  }
}

}  // namespace

CollocationSets sample_uniform(Interval domain, double T, CollocationCounts counts, std::uint64_t seed) {
  check_counts(counts);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Open interval (0, 1).
  auto draw = [&] {
    double u;
    do u = unit(rng);
    while (u == 0.0);
    return u;
  };
  CollocationSets s;
  s.interior_x.resize(counts.interior);
  s.interior_t.resize(counts.interior);
  for (int i = 0; i < counts.interior; ++i) {
    s.interior_x[i] = domain.lo + domain.width() * draw();
    s.interior_t[i] = T * draw();
  }
  place_boundary(s, domain, counts.spatial_boundary, [&] { return T * draw(); });
  s.initial_x.resize(counts.temporal_boundary);
  for (auto& x : s.initial_x) x = domain.lo + domain.width() * draw();
  return s;
}

CollocationSets sample_sobol(Interval domain, double T, CollocationCounts counts) {
  check_counts(counts);
  CollocationSets s;
  SobolSequence plane(2);
  s.interior_x.resize(counts.interior);
  s.interior_t.resize(counts.interior);
  for (int i = 0; i < counts.interior; ++i) {
    const auto p = plane.next();
    s.interior_x[i] = domain.lo + domain.width() * p[0];
    s.interior_t[i] = T * p[1];
  }
  SobolSequence line_sb(1);
  place_boundary(s, domain, counts.spatial_boundary, [&] { return T * line_sb.next()[0]; });
  SobolSequence line_tb(1);
  s.initial_x.resize(counts.temporal_boundary);
  for (auto& x : s.initial_x) x = domain.lo + domain.width() * line_tb.next()[0];
  return s;
}

void write_collocation_csv(const CollocationSets& sets, std::ostream& out) {
  out << "kind,x,t\n" << std::setprecision(17);
  for (std::size_t i = 0; i < sets.interior_x.size(); ++i)
    out << "interior," << sets.interior_x[i] << ',' << sets.interior_t[i] << '\n';
  for (std::size_t i = 0; i < sets.boundary_x.size(); ++i)
    out << "spatial_boundary," << sets.boundary_x[i] << ',' << sets.boundary_t[i] << '\n';
  for (double x : sets.initial_x) out << "temporal_boundary," << x << ",0\n";
}

}  // namespace wpinn
