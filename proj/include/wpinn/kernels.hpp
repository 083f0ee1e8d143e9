#pragma once

// Batched jet evaluation and reverse sweep over many collocation points.
//
// Points are cut into fixed-size chunks. Chunks are processed in parallel
// (OpenMP), each writing its own outputs and gradient slot; gradient slots are
// then summed in chunk order, so results are bit-identical for any thread
// count. The scalar forward_jet / backprop in network.hpp are the serial
// reference these kernels are tested against.

#include <span>
#include <vector>

#include "wpinn/network.hpp"

namespace wpinn {

/// Structure-of-arrays jets for a batch of points.
struct JetColumns {
  std::vector<double> value, dx, dt;

  void resize(std::size_t n) {
    value.assign(n, 0.0);
    dx.assign(n, 0.0);
    dt.assign(n, 0.0);
  }
  std::size_t size() const { return value.size(); }
  Jet at(std::size_t i) const { return {value[i], dx[i], dt[i]}; }
};

/// Which input-derivative tangents a batched pass propagates. Columns that are
/// not propagated stay zero in the output and their cotangents are ignored.
enum class Tangents { none, x, t, both };

class JetBatch {
 public:
  static constexpr int kChunk = 256;

  /// Forward pass over (x_i, t_i). Intermediates are retained for backward().
  void forward(const NetworkParams& params, std::span<const double> x, std::span<const double> t, Tangents mode,
               JetColumns& out, int threads = 1);

  /// Gradient of sum_i <cot_i, jet_i> for the jets of the last forward() call,
  /// which must have used the same parameter values.
  void backward(const NetworkParams& params, const JetColumns& cotangents, GradientBuffer& grad, int threads = 1);

  std::size_t size() const { return n_points_; }

 private:
  // Neuron-major storage: row i of a width x m block is contiguous, and is cut
  // into m / n segments of n points: the value followed by each propagated
  // tangent. Rows of `pre` are [W a_prev | z_x | z_t] (pre-activation without
  // bias, then tangents) and rows of h are [a | sigma'(z) z_x | sigma'(z) z_t].
  // Chunks are padded to kChunk points so row lengths are multiples of the
  // register block.
  struct HiddenTape {
    std::vector<double> pre, h, d1;
  };
  struct ChunkTape {
    int begin = 0, valid = 0;
    std::vector<double> x, t;
    std::vector<HiddenTape> hidden;
    std::vector<double> y, g, back, zrow;  // scratch, never shrunk
  };

  void forward_chunk(const NetworkParams& params, ChunkTape& tape, JetColumns& out) const;
  void backward_chunk(const NetworkParams& params, ChunkTape& tape, const JetColumns& cot,
                      GradientBuffer& grad) const;

  std::vector<ChunkTape> chunks_;
  std::vector<GradientBuffer> slots_;
  std::size_t n_points_ = 0;
  int segments_ = 1;
  int seg_x_ = 0, seg_t_ = 0;  // segment index of each tangent, 0 if absent
};

}  // namespace wpinn
