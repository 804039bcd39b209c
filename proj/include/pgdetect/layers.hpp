#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgdetect/rng.hpp"
#include "pgdetect/tensor.hpp"

namespace pgd {

enum class Mode { Training, Inference };

/// A trainable tensor and its gradient, both flat.
struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Param() = default;
  Param(std::string name, std::vector<std::size_t> shape);
  std::size_t size() const { return value.size(); }
};

/// Non-trainable persistent state (batch-norm running statistics).
struct Buffer {
  std::string name;
  std::vector<double> value;
};

enum class ActivationKind { Relu, LeakyRelu };

std::string to_string(ActivationKind kind);
ActivationKind activation_from_string(const std::string& s);

/// Output length of a "same"-padded convolution.
constexpr std::size_t same_output_length(std::size_t length, std::size_t stride) {
  return (length + stride - 1) / stride;
}

/// Zeros added before the first position; the remainder pads the end.
constexpr std::size_t same_pad_left(std::size_t length, std::size_t kernel, std::size_t stride) {
  const std::size_t out = same_output_length(length, stride);
  const std::size_t needed = (out - 1) * stride + kernel;
  return needed > length ? (needed - length) / 2 : 0;
}

class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  /// Caches whatever backward() needs.
  virtual Tensor3 forward(const Tensor3& x, Mode mode) = 0;
  /// Writes parameter gradients (overwriting) and returns dL/dx.
  virtual Tensor3 backward(const Tensor3& grad_out) = 0;

  virtual std::vector<Param*> params() { return {}; }
  virtual std::vector<Buffer*> buffers() { return {}; }
  virtual std::unique_ptr<Layer> clone() const = 0;
};

/// 1-D cross-correlation (no kernel flip) with zero "same" padding.
class Conv1d final : public Layer {
 public:
  Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size,
         std::size_t stride);

  std::string kind() const override { return "conv1d"; }
  Tensor3 forward(const Tensor3& x, Mode mode) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  std::vector<Param*> params() override { return {&weight, &bias}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1d>(*this); }

  std::size_t in_channels() const { return in_channels_; }
  std::size_t out_channels() const { return out_channels_; }
  std::size_t kernel_size() const { return kernel_size_; }
  std::size_t stride() const { return stride_; }

  double& w(std::size_t out, std::size_t in, std::size_t k) {
    return weight.value[(out * in_channels_ + in) * kernel_size_ + k];
  }

  Param weight;  // out x in x kernel
  Param bias;    // out

 private:
  std::size_t in_channels_;
  std::size_t out_channels_;
  std::size_t kernel_size_;
  std::size_t stride_;
  std::optional<Tensor3> input_;
};

/// Per-channel normalization over (batch, position).
class BatchNorm1d final : public Layer {
 public:
  explicit BatchNorm1d(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  std::string kind() const override { return "batchnorm1d"; }
  Tensor3 forward(const Tensor3& x, Mode mode) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  std::vector<Param*> params() override { return {&gamma, &beta}; }
  std::vector<Buffer*> buffers() override { return {&running_mean, &running_var}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<BatchNorm1d>(*this); }

  std::size_t channels() const { return channels_; }
  double eps() const { return eps_; }
  double momentum() const { return momentum_; }

  Param gamma;
  Param beta;
  Buffer running_mean;
  Buffer running_var;

 private:
  std::size_t channels_;
  double eps_;
  double momentum_;
  // Training-mode cache.
  std::optional<Tensor3> normalized_;
  std::vector<double> inv_std_;
  bool cached_training_ = false;
};

class Activation final : public Layer {
 public:
  explicit Activation(ActivationKind kind, double alpha = 0.01);

  std::string kind() const override { return "activation"; }
  Tensor3 forward(const Tensor3& x, Mode mode) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Activation>(*this); }

  ActivationKind activation() const { return kind_; }
  double alpha() const { return alpha_; }

 private:
  ActivationKind kind_;
  double alpha_;
  std::optional<Tensor3> input_;
};

/// (B, C, L) -> (B, C*L, 1). Data order is unchanged.
class Flatten final : public Layer {
 public:
  std::string kind() const override { return "flatten"; }
  Tensor3 forward(const Tensor3& x, Mode mode) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
};

/// Affine map on (B, in, 1) tensors: y = W x + b.
class Dense final : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  std::string kind() const override { return "dense"; }
  Tensor3 forward(const Tensor3& x, Mode mode) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  std::vector<Param*> params() override { return {&weight, &bias}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  std::size_t in_features() const { return in_features_; }
  std::size_t out_features() const { return out_features_; }

  Param weight;  // out x in
  Param bias;    // out

 private:
  std::size_t in_features_;
  std::size_t out_features_;
  std::optional<Tensor3> input_;
};

/// Inverted dropout: survivors are scaled by 1/(1-rate) during training.
class Dropout final : public Layer {
 public:
  Dropout(double rate, std::uint64_t seed);

  std::string kind() const override { return "dropout"; }
  Tensor3 forward(const Tensor3& x, Mode mode) override;
  Tensor3 backward(const Tensor3& grad_out) override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

  double rate() const { return rate_; }
  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

 private:
  double rate_;
  Rng rng_;
  std::vector<double> mask_;
};

/// He-normal weights, zero bias.
void he_init(Param& weight, std::size_t fan_in, Rng& rng);

}  // namespace pgd
