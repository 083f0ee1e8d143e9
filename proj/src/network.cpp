#include "wpinn/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "wpinn/errors.hpp"

namespace wpinn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::tanh:
      return "tanh";
    case Activation::sin:
      return "sin";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "sin") return Activation::sin;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

DenseLayout::DenseLayout(std::vector<int> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("a network needs at least an input and an output width");
  if (widths_.front() != 2) throw ConfigError("input width must be 2 (x, t)");
  if (widths_.back() != 1) throw ConfigError("output width must be 1");
  for (int w : widths_)
    if (w <= 0) throw ConfigError("layer widths must be positive");
  offsets_.resize(widths_.size() - 1);
  std::size_t off = 0;
  for (int k = 0; k < num_layers(); ++k) {
    offsets_[k] = off;
    off += static_cast<std::size_t>(rows(k)) * cols(k) + rows(k);
  }
  size_ = off;
}

int DenseLayout::max_width() const { return *std::max_element(widths_.begin(), widths_.end()); }

bool LayeredVector::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

GradientBuffer& GradientBuffer::operator+=(const GradientBuffer& other) {
  if (!(layout_ == other.layout_)) throw ContractError("gradient buffers have different shapes");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

GradientBuffer& GradientBuffer::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

std::vector<int> make_widths(int hidden_layers, int width) {
  if (hidden_layers < 0 || width <= 0) throw ConfigError("invalid hidden layer specification");
  std::vector<int> w{2};
  for (int i = 0; i < hidden_layers; ++i) w.push_back(width);
  w.push_back(1);
  return w;
}

NetworkParams init_params(const std::vector<int>& widths, Activation activation, std::uint64_t seed) {
  NetworkParams params(DenseLayout(widths), activation);
  std::mt19937_64 rng(seed);
  for (int k = 0; k < params.layout().num_layers(); ++k) {
    const int fan_in = params.layout().cols(k);
    const int fan_out = params.layout().rows(k);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = params.weight(k);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    params.bias(k).setZero();
  }
  return params;
}

namespace {

struct Act {
  double a, d1, d2;
};

inline Act activate(Activation kind, double z) {
  if (kind == Activation::tanh) {
    const double a = std::tanh(z);
    const double d1 = 1.0 - a * a;
    return {a, d1, -2.0 * a * d1};
  }
  const double a = std::sin(z);
  return {a, std::cos(z), -a};
}

// Per-layer record of a scalar forward pass, kept for the reverse sweep.
struct PointTape {
  // Activations entering affine map k (k = 0 is the input).
  std::vector<std::vector<double>> a, ax, at;
  // Pre-activation tangents and activation derivatives of hidden layer k.
  std::vector<std::vector<double>> zx, zt, d1, d2;
  Jet out;
};

PointTape record(const NetworkParams& params, double x, double t) {
  const auto& layout = params.layout();
  const int L = layout.num_layers();
  PointTape tape;
  tape.a.resize(L);
  tape.ax.resize(L);
  tape.at.resize(L);
  tape.zx.resize(L);
  tape.zt.resize(L);
  tape.d1.resize(L);
  tape.d2.resize(L);
  tape.a[0] = {x, t};
  tape.ax[0] = {1.0, 0.0};
  tape.at[0] = {0.0, 1.0};
  for (int k = 0; k < L; ++k) {
    const auto w = params.weight(k);
    const auto b = params.bias(k);
    const int rows = layout.rows(k);
    const int cols = layout.cols(k);
    std::vector<double> z(rows), zx(rows), zt(rows);
    for (int i = 0; i < rows; ++i) {
      double s = b(i), sx = 0.0, st = 0.0;
      for (int j = 0; j < cols; ++j) {
        s += w(i, j) * tape.a[k][j];
        sx += w(i, j) * tape.ax[k][j];
        st += w(i, j) * tape.at[k][j];
      }
      z[i] = s;
      zx[i] = sx;
      zt[i] = st;
    }
    if (k == L - 1) {
      tape.out = {z[0], zx[0], zt[0]};
      break;
    }
    std::vector<double> a(rows), ax(rows), at(rows), d1(rows), d2(rows);
    for (int i = 0; i < rows; ++i) {
      const Act act = activate(params.activation(), z[i]);
      a[i] = act.a;
      d1[i] = act.d1;
      d2[i] = act.d2;
      ax[i] = act.d1 * zx[i];
      at[i] = act.d1 * zt[i];
    }
    tape.zx[k] = std::move(zx);
    tape.zt[k] = std::move(zt);
    tape.d1[k] = std::move(d1);
    tape.d2[k] = std::move(d2);
    tape.a[k + 1] = std::move(a);
    tape.ax[k + 1] = std::move(ax);
    tape.at[k + 1] = std::move(at);
  }
  return tape;
}

}  // namespace

Jet forward_jet(const NetworkParams& params, double x, double t) { return record(params, x, t).out; }

GradientBuffer backprop(const NetworkParams& params, std::span<const double> x, std::span<const double> t,
                        std::span<const Jet> cotangents) {
  if (x.size() != t.size() || x.size() != cotangents.size())
    throw ContractError("backprop: points and cotangents differ in length");
  const auto& layout = params.layout();
  const int L = layout.num_layers();
  GradientBuffer grad(layout);
  for (std::size_t p = 0; p < x.size(); ++p) {
    const PointTape tape = record(params, x[p], t[p]);
    std::vector<double> gv{cotangents[p].value}, gx{cotangents[p].dx}, gt{cotangents[p].dt};
    for (int k = L - 1; k >= 0; --k) {
      auto gw = grad.weight(k);
      auto gb = grad.bias(k);
      const int rows = layout.rows(k);
      const int cols = layout.cols(k);
      for (int i = 0; i < rows; ++i) {
        gb(i) += gv[i];
        for (int j = 0; j < cols; ++j)
          gw(i, j) += gv[i] * tape.a[k][j] + gx[i] * tape.ax[k][j] + gt[i] * tape.at[k][j];
      }
      if (k == 0) break;
      const auto w = params.weight(k);
      // Cotangents of the activations entering map k, then through sigma.
      std::vector<double> nv(cols, 0.0), nx(cols, 0.0), nt(cols, 0.0);
      for (int j = 0; j < cols; ++j) {
        double sv = 0.0, sx = 0.0, st = 0.0;
        for (int i = 0; i < rows; ++i) {
          sv += w(i, j) * gv[i];
          sx += w(i, j) * gx[i];
          st += w(i, j) * gt[i];
        }
        const int h = k - 1;
        nv[j] = sv * tape.d1[h][j] + (sx * tape.zx[h][j] + st * tape.zt[h][j]) * tape.d2[h][j];
        nx[j] = sx * tape.d1[h][j];
        nt[j] = st * tape.d1[h][j];
      }
      gv = std::move(nv);
      gx = std::move(nx);
      gt = std::move(nt);
    }
  }
  return grad;
}

namespace {

constexpr char kMagic[4] = {'W', 'P', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t activation_tag(Activation a) { return a == Activation::tanh ? 0u : 1u; }

Activation activation_from_tag(std::uint32_t tag) {
  if (tag == 0) return Activation::tanh;
  if (tag == 1) return Activation::sin;
  throw ConfigError("checkpoint: unknown activation tag");
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw ConfigError("checkpoint: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ConfigError("checkpoint: truncated data");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

// Visits parameters in checkpoint order: row-major weights, then biases.
template <class Params, class Fn>
void for_each_in_file_order(Params& params, Fn&& fn) {
  const int L = params.layout().num_layers();
  for (int k = 0; k < L; ++k) {
    auto w = params.weight(k);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) fn(w(i, j));
  }
  for (int k = 0; k < L; ++k) {
    auto b = params.bias(k);
    for (Eigen::Index i = 0; i < b.size(); ++i) fn(b(i));
  }
}

}  // namespace

void write_checkpoint(const NetworkParams& params, std::ostream& out, CheckpointFormat format) {
  const auto& widths = params.widths();
  if (format == CheckpointFormat::binary) {
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, activation_tag(params.activation()));
    put_u32(out, static_cast<std::uint32_t>(widths.size()));
    for (int w : widths) put_u32(out, static_cast<std::uint32_t>(w));
    for_each_in_file_order(params, [&](double v) { put_f64(out, v); });
  } else {
    out << "wpinn-net " << kVersion << ' ' << to_string(params.activation()) << ' ' << widths.size();
    for (int w : widths) out << ' ' << w;
    out << '\n';
    out << std::setprecision(17);
    for_each_in_file_order(params, [&](double v) { out << v << '\n'; });
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

NetworkParams read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4)) throw ConfigError("checkpoint: empty stream");
  if (std::equal(magic, magic + 4, kMagic)) {
    if (get_u32(in) != kVersion) throw ConfigError("checkpoint: unsupported version");
    const Activation act = activation_from_tag(get_u32(in));
    const std::uint32_t n = get_u32(in);
    if (n < 2 || n > 1024) throw ConfigError("checkpoint: implausible width count");
    std::vector<int> widths(n);
    for (auto& w : widths) w = static_cast<int>(get_u32(in));
    NetworkParams params(DenseLayout(widths), act);
    for_each_in_file_order(params, [&](double& v) { v = get_f64(in); });
    return params;
  }
  std::string rest;
  std::getline(in, rest);
  std::istringstream header(std::string(magic, 4) + rest);
  std::string tag, act_name;
  std::uint32_t version = 0;
  std::size_t n = 0;
  header >> tag >> version >> act_name >> n;
  if (tag != "wpinn-net" || version != kVersion || !header) throw ConfigError("checkpoint: unrecognized format");
  std::vector<int> widths(n);
  for (auto& w : widths) header >> w;
  if (!header) throw ConfigError("checkpoint: bad width list");
  NetworkParams params(DenseLayout(widths), parse_activation(act_name));
  for_each_in_file_order(params, [&](double& v) {
    if (!(in >> v)) throw ConfigError("checkpoint: truncated data");
  });
  return params;
}

void save_checkpoint(const NetworkParams& params, const std::string& path, CheckpointFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_checkpoint(params, out, format);
}

NetworkParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace wpinn
