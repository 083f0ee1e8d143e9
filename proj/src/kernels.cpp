#include "wpinn/kernels.hpp"

#include <algorithm>

#include "wpinn/errors.hpp"
#include "wpinn/vector_math.hpp"

namespace wpinn {

namespace {

// Register block: four vectors of native width. GCC vector extensions keep the
// accumulators in registers where an array under `omp simd` was spilled.
#if defined(__AVX512F__)
constexpr int kLanes = 8;
#elif defined(__AVX__)
constexpr int kLanes = 4;
#else
constexpr int kLanes = 2;
#endif
typedef double vec __attribute__((vector_size(kLanes * sizeof(double)), aligned(sizeof(double))));
constexpr int kBlock = 4 * kLanes;
static_assert(JetBatch::kChunk % kBlock == 0);

inline const vec* as_vec(const double* p) { return reinterpret_cast<const vec*>(p); }
inline vec* as_vec(double* p) { return reinterpret_cast<vec*>(p); }

inline double hsum(vec v) {
  double s = 0.0;
  for (int l = 0; l < kLanes; ++l) s += v[l];
  return s;
}

void ensure(std::vector<double>& v, std::size_t n) {
  if (v.size() < n) v.resize(n);
}

// Y(r, :) = sum_s A(r, s) X(s, :) with A(r, s) = coef[r * rs + s * ss]; X, Y are
// neuron-major with row length m (a multiple of kBlock).
void mix(const double* coef, int rs, int ss, int rows, int inner, const double* X, int m, double* Y) {
  for (int cb = 0; cb < m; cb += kBlock) {
    for (int r = 0; r < rows; ++r) {
      vec a0 = {}, a1 = {}, a2 = {}, a3 = {};
      const double* cr = coef + r * rs;
      const double* xs = X + cb;
      for (int s = 0; s < inner; ++s, xs += m) {
        const double a = cr[s * ss];
        a0 += a * as_vec(xs)[0];
        a1 += a * as_vec(xs)[1];
        a2 += a * as_vec(xs)[2];
        a3 += a * as_vec(xs)[3];
      }
      vec* yr = as_vec(Y + static_cast<std::size_t>(r) * m + cb);
      yr[0] = a0;
      yr[1] = a1;
      yr[2] = a2;
      yr[3] = a3;
    }
  }
}

// gw(i, j) += sum_c G(i, c) H(j, c), gw column-major rows x cols; four rows of
// G share each load of H(j, .).
void outer_acc(const double* G, int rows, const double* H, int cols, int m, double* gw) {
  for (int j = 0; j < cols; ++j) {
    const double* hj = H + static_cast<std::size_t>(j) * m;
    int i = 0;
    for (; i + 4 <= rows; i += 4) {
      const double* g0 = G + static_cast<std::size_t>(i) * m;
      const double* g1 = g0 + m;
      const double* g2 = g1 + m;
      const double* g3 = g2 + m;
      vec s0 = {}, s1 = {}, s2 = {}, s3 = {};
      for (int c = 0; c < m; c += kLanes) {
        const vec h = *as_vec(hj + c);
        s0 += *as_vec(g0 + c) * h;
        s1 += *as_vec(g1 + c) * h;
        s2 += *as_vec(g2 + c) * h;
        s3 += *as_vec(g3 + c) * h;
      }
      gw[i + j * rows] += hsum(s0);
      gw[i + 1 + j * rows] += hsum(s1);
      gw[i + 2 + j * rows] += hsum(s2);
      gw[i + 3 + j * rows] += hsum(s3);
    }
    for (; i < rows; ++i) {
      const double* gi = G + static_cast<std::size_t>(i) * m;
      vec s0 = {};
      for (int c = 0; c < m; c += kLanes) s0 += *as_vec(gi + c) * *as_vec(hj + c);
      gw[i + j * rows] += hsum(s0);
    }
  }
}

double dot(const double* a, const double* b, int n) {
  vec s = {};
  for (int c = 0; c < n; c += kLanes) s += *as_vec(a + c) * *as_vec(b + c);
  return hsum(s);
}

double row_sum(const double* a, int n) {
  vec s = {};
  for (int c = 0; c < n; c += kLanes) s += *as_vec(a + c);
  return hsum(s);
}

}  // namespace

void JetBatch::forward(const NetworkParams& params, std::span<const double> x, std::span<const double> t,
                       Tangents mode, JetColumns& out, int threads) {
  if (x.size() != t.size()) throw ContractError("JetBatch::forward: x and t differ in length");
  n_points_ = x.size();
  segments_ = 1;
  seg_x_ = seg_t_ = 0;
  if (mode == Tangents::x || mode == Tangents::both) seg_x_ = segments_++;
  if (mode == Tangents::t || mode == Tangents::both) seg_t_ = segments_++;
  out.resize(n_points_);
  const int n_chunks = static_cast<int>((n_points_ + kChunk - 1) / kChunk);
  chunks_.resize(n_chunks);
  for (int c = 0; c < n_chunks; ++c) {
    auto& tape = chunks_[c];
    tape.begin = c * kChunk;
    tape.valid = static_cast<int>(std::min<std::size_t>(kChunk, n_points_ - tape.begin));
    tape.x.assign(kChunk, 0.0);
    tape.t.assign(kChunk, 0.0);
    std::copy_n(x.begin() + tape.begin, tape.valid, tape.x.begin());
    std::copy_n(t.begin() + tape.begin, tape.valid, tape.t.begin());
  }
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int c = 0; c < n_chunks; ++c) forward_chunk(params, chunks_[c], out);
}

void JetBatch::forward_chunk(const NetworkParams& params, ChunkTape& tape, JetColumns& out) const {
  const auto& widths = params.layout().widths();
  const int L = params.layout().num_layers();
  constexpr int n = kChunk;
  const int m = segments_ * n;
  tape.hidden.resize(L - 1);

  // First affine map straight from the inputs (bias is added at activation).
  {
    const int w = widths[1];
    const double* W = params.weight(0).data();
    std::vector<double>& pre = L > 1 ? tape.hidden[0].pre : tape.y;
    ensure(pre, static_cast<std::size_t>(w) * m);
    for (int i = 0; i < w; ++i) {
      const double wx = W[i], wt = W[i + w];
      double* pi = pre.data() + static_cast<std::size_t>(i) * m;
      for (int c = 0; c < n; ++c) pi[c] = wx * tape.x[c] + wt * tape.t[c];
      if (seg_x_) std::fill_n(pi + seg_x_ * n, n, wx);
      if (seg_t_) std::fill_n(pi + seg_t_ * n, n, wt);
    }
  }

  ensure(tape.zrow, n);
  for (int k = 0; k + 1 < L; ++k) {
    const int w = widths[k + 1];
    HiddenTape& h = tape.hidden[k];
    ensure(h.h, static_cast<std::size_t>(w) * m);
    ensure(h.d1, static_cast<std::size_t>(w) * n);
    const double* b = params.bias(k).data();
    for (int i = 0; i < w; ++i) {
      const double* pi = h.pre.data() + static_cast<std::size_t>(i) * m;
      double* ai = h.h.data() + static_cast<std::size_t>(i) * m;
      double* di = h.d1.data() + static_cast<std::size_t>(i) * n;
      for (int c = 0; c < n; ++c) tape.zrow[c] = pi[c] + b[i];
      if (params.activation() == Activation::tanh) {
        vmath::tanh(tape.zrow.data(), ai, n);
        for (int c = 0; c < n; ++c) di[c] = 1.0 - ai[c] * ai[c];
      } else {
        vmath::sin_cos(tape.zrow.data(), ai, di, n);
      }
      for (int seg = 1; seg < segments_; ++seg)
        for (int c = 0; c < n; ++c) ai[seg * n + c] = di[c] * pi[seg * n + c];
    }
    const int w_next = widths[k + 2];
    std::vector<double>& next = k + 2 < L ? tape.hidden[k + 1].pre : tape.y;
    ensure(next, static_cast<std::size_t>(w_next) * m);
    mix(params.weight(k + 1).data(), 1, w_next, w_next, w, h.h.data(), m, next.data());
  }

  const double b_out = params.bias(L - 1)[0];
  for (int c = 0; c < tape.valid; ++c) {
    out.value[tape.begin + c] = tape.y[c] + b_out;
    if (seg_x_) out.dx[tape.begin + c] = tape.y[seg_x_ * n + c];
    if (seg_t_) out.dt[tape.begin + c] = tape.y[seg_t_ * n + c];
  }
}

void JetBatch::backward(const NetworkParams& params, const JetColumns& cotangents, GradientBuffer& grad,
                        int threads) {
  if (cotangents.size() != n_points_) throw ContractError("JetBatch::backward: cotangent count mismatch");
  const int n_chunks = static_cast<int>(chunks_.size());
  if (static_cast<int>(slots_.size()) != n_chunks || (n_chunks > 0 && !(slots_[0].layout() == params.layout())))
    slots_.assign(n_chunks, GradientBuffer(params.layout()));
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int c = 0; c < n_chunks; ++c) {
    slots_[c].set_zero();
    backward_chunk(params, chunks_[c], cotangents, slots_[c]);
  }
  grad = GradientBuffer(params.layout());
  for (const auto& slot : slots_) grad += slot;
}

void JetBatch::backward_chunk(const NetworkParams& params, ChunkTape& tape, const JetColumns& cot,
                              GradientBuffer& grad) const {
  const auto& widths = params.layout().widths();
  const int L = params.layout().num_layers();
  constexpr int n = kChunk;
  const int m = segments_ * n;

  // g holds the segment-wise cotangents of the current pre-activation.
  ensure(tape.g, m);
  std::fill_n(tape.g.begin(), m, 0.0);
  for (int c = 0; c < tape.valid; ++c) {
    tape.g[c] = cot.value[tape.begin + c];
    if (seg_x_) tape.g[seg_x_ * n + c] = cot.dx[tape.begin + c];
    if (seg_t_) tape.g[seg_t_ * n + c] = cot.dt[tape.begin + c];
  }
  const bool is_tanh = params.activation() == Activation::tanh;
  for (int k = L - 1; k >= 0; --k) {
    const int w_out = widths[k + 1], w_in = widths[k];
    double* gw = grad.weight(k).data();
    double* gb = grad.bias(k).data();
    for (int i = 0; i < w_out; ++i) gb[i] += row_sum(tape.g.data() + static_cast<std::size_t>(i) * m, n);
    if (k == 0) {
      for (int i = 0; i < w_out; ++i) {
        const double* gi = tape.g.data() + static_cast<std::size_t>(i) * m;
        gw[i] += dot(gi, tape.x.data(), n);
        gw[i + w_out] += dot(gi, tape.t.data(), n);
        if (seg_x_) gw[i] += row_sum(gi + seg_x_ * n, n);
        if (seg_t_) gw[i + w_out] += row_sum(gi + seg_t_ * n, n);
      }
      break;
    }
    const HiddenTape& h = tape.hidden[k - 1];
    outer_acc(tape.g.data(), w_out, h.h.data(), w_in, m, gw);
    ensure(tape.back, static_cast<std::size_t>(w_in) * m);
    mix(params.weight(k).data(), w_out, 1, w_in, w_out, tape.g.data(), m, tape.back.data());
    ensure(tape.g, static_cast<std::size_t>(w_in) * m);
    for (int i = 0; i < w_in; ++i) {
      const double* bi = tape.back.data() + static_cast<std::size_t>(i) * m;
      const double* di = h.d1.data() + static_cast<std::size_t>(i) * n;
      const double* ai = h.h.data() + static_cast<std::size_t>(i) * m;
      double* gi = tape.g.data() + static_cast<std::size_t>(i) * m;
      if (segments_ > 1) {
        const double* pi = h.pre.data() + static_cast<std::size_t>(i) * m;
        // sigma'' from a = sigma(z), d1 = sigma'(z).
        for (int c = 0; c < n; ++c) gi[c] = bi[c] * di[c];
        for (int seg = 1; seg < segments_; ++seg) {
          const double* bs = bi + seg * n;
          const double* ps = pi + seg * n;
          double* gs = gi + seg * n;
          if (is_tanh)
            for (int c = 0; c < n; ++c) gi[c] -= 2.0 * bs[c] * ps[c] * ai[c] * di[c];
          else
            for (int c = 0; c < n; ++c) gi[c] -= bs[c] * ps[c] * ai[c];
          for (int c = 0; c < n; ++c) gs[c] = bs[c] * di[c];
        }
      } else {
        for (int c = 0; c < n; ++c) gi[c] = bi[c] * di[c];
      }
    }
  }
}

}  // namespace wpinn
