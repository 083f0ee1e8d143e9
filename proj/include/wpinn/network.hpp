#pragma once

// Dense feed-forward networks u(x, t) with input-derivative jets.
//
// Parameters live in one flat vector (weights column-major per layer, then
// the bias of that layer), so optimizers and finite-difference checks can
// treat them as a plain array while the kernels see Eigen views.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace wpinn {

enum class Activation { tanh, sin };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// A scalar with its partial derivatives in x and t.
struct Jet {
  double value = 0.0;
  double dx = 0.0;
  double dt = 0.0;
};

/// Block offsets of a dense network with widths l_0..l_L.
class DenseLayout {
 public:
  DenseLayout() = default;
  /// Throws ConfigError unless l_0 == 2, l_L == 1 and every width is positive.
  explicit DenseLayout(std::vector<int> widths);

  const std::vector<int>& widths() const { return widths_; }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  int rows(int k) const { return widths_[k + 1]; }
  int cols(int k) const { return widths_[k]; }
  std::size_t weight_offset(int k) const { return offsets_[k]; }
  std::size_t bias_offset(int k) const { return offsets_[k] + static_cast<std::size_t>(rows(k)) * cols(k); }
  std::size_t size() const { return size_; }
  int max_width() const;

  bool operator==(const DenseLayout& other) const { return widths_ == other.widths_; }

 private:
  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;
  std::size_t size_ = 0;
};

/// Flat storage with per-layer matrix/vector views.
class LayeredVector {
 public:
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;
  using VectorMap = Eigen::Map<Eigen::VectorXd>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  LayeredVector() = default;
  explicit LayeredVector(DenseLayout layout) : layout_(std::move(layout)), data_(layout_.size(), 0.0) {}

  const DenseLayout& layout() const { return layout_; }
  std::size_t size() const { return data_.size(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  MatrixMap weight(int k) { return {data_.data() + layout_.weight_offset(k), layout_.rows(k), layout_.cols(k)}; }
  ConstMatrixMap weight(int k) const {
    return {data_.data() + layout_.weight_offset(k), layout_.rows(k), layout_.cols(k)};
  }
  VectorMap bias(int k) { return {data_.data() + layout_.bias_offset(k), layout_.rows(k)}; }
  ConstVectorMap bias(int k) const { return {data_.data() + layout_.bias_offset(k), layout_.rows(k)}; }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }
  bool all_finite() const;

 protected:
  DenseLayout layout_;
  std::vector<double> data_;
};

class NetworkParams : public LayeredVector {
 public:
  NetworkParams() = default;
  NetworkParams(DenseLayout layout, Activation activation)
      : LayeredVector(std::move(layout)), activation_(activation) {}

  Activation activation() const { return activation_; }
  const std::vector<int>& widths() const { return layout_.widths(); }

  bool operator==(const NetworkParams& other) const {
    return activation_ == other.activation_ && layout_ == other.layout_ && data_ == other.data_;
  }

 private:
  Activation activation_ = Activation::tanh;
};

/// d(loss)/d(parameter), congruent with a NetworkParams.
class GradientBuffer : public LayeredVector {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(const DenseLayout& layout) : LayeredVector(layout) {}

  GradientBuffer& operator+=(const GradientBuffer& other);
  GradientBuffer& operator*=(double s);
};

/// Widths for `hidden_layers` hidden layers of `width` neurons on (x, t) -> u.
std::vector<int> make_widths(int hidden_layers, int width);

/// Glorot-uniform weights, zero biases. Deterministic in `seed`.
NetworkParams init_params(const std::vector<int>& widths, Activation activation, std::uint64_t seed);

/// Value and exact input partials at one point. Scalar reference path.
Jet forward_jet(const NetworkParams& params, double x, double t);

/// Reverse-mode gradient of sum_i <cotangent_i, jet_i> with respect to every
/// parameter, where jet_i = forward_jet(params, x_i, t_i). Scalar reference
/// path; the batched kernel in kernels.hpp must agree with it.
GradientBuffer backprop(const NetworkParams& params, std::span<const double> x, std::span<const double> t,
                        std::span<const Jet> cotangents);

enum class CheckpointFormat { binary, text };

// Binary: "WPNN" magic, u32 version, u32 activation tag, u32 width count,
// u32 widths, then f64 little-endian weights (row-major, layer by layer) and
// finally all biases layer by layer. Text has the same order, one header line.
void write_checkpoint(const NetworkParams& params, std::ostream& out, CheckpointFormat format);
NetworkParams read_checkpoint(std::istream& in);
void save_checkpoint(const NetworkParams& params, const std::string& path, CheckpointFormat format);
NetworkParams load_checkpoint(const std::string& path);

}  // namespace wpinn
