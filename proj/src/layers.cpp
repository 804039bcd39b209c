#include "pgdetect/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace pgd {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

const Tensor3& require_cache(const std::optional<Tensor3>& cache, const char* who) {
  if (!cache) throw std::logic_error(std::string(who) + ": backward called before forward");
  return *cache;
}

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* who) {
  if (a.batch() != b.batch() || a.channels() != b.channels() || a.length() != b.length()) {
    throw std::invalid_argument(std::string(who) + ": gradient shape " + b.shape_string() +
                                " does not match " + a.shape_string());
  }
}

}  // namespace

Param::Param(std::string name, std::vector<std::size_t> shape)
    : name(std::move(name)),
      shape(std::move(shape)),
      value(product(this->shape), 0.0),
      grad(product(this->shape), 0.0) {}

std::string to_string(ActivationKind kind) {
  return kind == ActivationKind::Relu ? "relu" : "leaky_relu";
}

ActivationKind activation_from_string(const std::string& s) {
  if (s == "relu") return ActivationKind::Relu;
  if (s == "leaky_relu") return ActivationKind::LeakyRelu;
  throw std::invalid_argument("unknown activation '" + s + "' (expected relu or leaky_relu)");
}

void he_init(Param& weight, std::size_t fan_in, Rng& rng) {
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& w : weight.value) w = rng.normal(0.0, std);
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size,
               std::size_t stride)
    : weight("weight", {out_channels, in_channels, kernel_size}),
      bias("bias", {out_channels}),
      in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_size_(kernel_size),
      stride_(stride) {
  if (in_channels == 0 || out_channels == 0 || kernel_size == 0) {
    throw std::invalid_argument("Conv1d: channels and kernel size must be positive");
  }
  if (stride != 1 && stride != 2) throw std::invalid_argument("Conv1d: stride must be 1 or 2");
}

Tensor3 Conv1d::forward(const Tensor3& x, Mode) {
  if (x.channels() != in_channels_) {
    throw std::invalid_argument("Conv1d: input has " + std::to_string(x.channels()) +
                                " channels, layer expects " + std::to_string(in_channels_));
  }
  const std::size_t len = x.length();
  const std::size_t out_len = same_output_length(len, stride_);
  const auto pad = static_cast<std::ptrdiff_t>(same_pad_left(len, kernel_size_, stride_));
  Tensor3 y(x.batch(), out_channels_, out_len);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t o = 0; o < out_channels_; ++o) {
      for (std::size_t p = 0; p < out_len; ++p) {
        double acc = bias.value[o];
        const auto start = static_cast<std::ptrdiff_t>(p * stride_) - pad;
        for (std::size_t i = 0; i < in_channels_; ++i) {
          const double* wk = &weight.value[(o * in_channels_ + i) * kernel_size_];
          for (std::size_t k = 0; k < kernel_size_; ++k) {
            const auto pos = start + static_cast<std::ptrdiff_t>(k);
            if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(len)) {
              acc += wk[k] * x(b, i, static_cast<std::size_t>(pos));
            }
          }
        }
        y(b, o, p) = acc;
      }
    }
  }
  input_ = x;
  return y;
}

Tensor3 Conv1d::backward(const Tensor3& grad_out) {
  const Tensor3& x = require_cache(input_, "Conv1d");
  const std::size_t len = x.length();
  const std::size_t out_len = same_output_length(len, stride_);
  if (grad_out.batch() != x.batch() || grad_out.channels() != out_channels_ ||
      grad_out.length() != out_len) {
    throw std::invalid_argument("Conv1d: grad_out shape " + grad_out.shape_string() +
                                " inconsistent with forward input " + x.shape_string());
  }
  const auto pad = static_cast<std::ptrdiff_t>(same_pad_left(len, kernel_size_, stride_));
  std::fill(weight.grad.begin(), weight.grad.end(), 0.0);
  std::fill(bias.grad.begin(), bias.grad.end(), 0.0);
  Tensor3 grad_x(x.batch(), in_channels_, len);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t o = 0; o < out_channels_; ++o) {
      for (std::size_t p = 0; p < out_len; ++p) {
        const double g = grad_out(b, o, p);
        bias.grad[o] += g;
        const auto start = static_cast<std::ptrdiff_t>(p * stride_) - pad;
        for (std::size_t i = 0; i < in_channels_; ++i) {
          const std::size_t base = (o * in_channels_ + i) * kernel_size_;
          for (std::size_t k = 0; k < kernel_size_; ++k) {
            const auto pos = start + static_cast<std::ptrdiff_t>(k);
            if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(len)) {
              const auto q = static_cast<std::size_t>(pos);
              weight.grad[base + k] += g * x(b, i, q);
              grad_x(b, i, q) += g * weight.value[base + k];
            }
          }
        }
      }
    }
  }
  return grad_x;
}

// ---------------------------------------------------------------- BatchNorm1d

BatchNorm1d::BatchNorm1d(std::size_t channels, double eps, double momentum)
    : gamma("gamma", {channels}),
      beta("beta", {channels}),
      running_mean{"running_mean", std::vector<double>(channels, 0.0)},
      running_var{"running_var", std::vector<double>(channels, 1.0)},
      channels_(channels),
      eps_(eps),
      momentum_(momentum) {
  std::fill(gamma.value.begin(), gamma.value.end(), 1.0);
}

Tensor3 BatchNorm1d::forward(const Tensor3& x, Mode mode) {
  if (x.channels() != channels_) {
    throw std::invalid_argument("BatchNorm1d: input has " + std::to_string(x.channels()) +
                                " channels, layer expects " + std::to_string(channels_));
  }
  const std::size_t count = x.batch() * x.length();
  Tensor3 xhat(x.batch(), channels_, x.length());
  Tensor3 y(x.batch(), channels_, x.length());
  inv_std_.assign(channels_, 0.0);
  cached_training_ = mode == Mode::Training;
  if (cached_training_ && count < 2) {
    throw std::invalid_argument(
        "BatchNorm1d: training mode needs at least 2 values per channel (batch x length)");
  }
  for (std::size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (cached_training_) {
      for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t l = 0; l < x.length(); ++l) mean += x(b, c, l);
      mean /= static_cast<double>(count);
      for (std::size_t b = 0; b < x.batch(); ++b)
        for (std::size_t l = 0; l < x.length(); ++l) {
          const double d = x(b, c, l) - mean;
          var += d * d;
        }
      var /= static_cast<double>(count);
      running_mean.value[c] = (1.0 - momentum_) * running_mean.value[c] + momentum_ * mean;
      running_var.value[c] = (1.0 - momentum_) * running_var.value[c] + momentum_ * var;
    } else {
      mean = running_mean.value[c];
      var = running_var.value[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv_std;
    for (std::size_t b = 0; b < x.batch(); ++b) {
      for (std::size_t l = 0; l < x.length(); ++l) {
        const double h = (x(b, c, l) - mean) * inv_std;
        xhat(b, c, l) = h;
        y(b, c, l) = gamma.value[c] * h + beta.value[c];
      }
    }
  }
  normalized_ = std::move(xhat);
  return y;
}

Tensor3 BatchNorm1d::backward(const Tensor3& grad_out) {
  const Tensor3& xhat = require_cache(normalized_, "BatchNorm1d");
  require_same_shape(xhat, grad_out, "BatchNorm1d");
  const double count = static_cast<double>(xhat.batch() * xhat.length());
  Tensor3 grad_x(xhat.batch(), channels_, xhat.length());
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t b = 0; b < xhat.batch(); ++b)
      for (std::size_t l = 0; l < xhat.length(); ++l) {
        sum_g += grad_out(b, c, l);
        sum_gx += grad_out(b, c, l) * xhat(b, c, l);
      }
    beta.grad[c] = sum_g;
    gamma.grad[c] = sum_gx;
    const double scale = gamma.value[c] * inv_std_[c];
    for (std::size_t b = 0; b < xhat.batch(); ++b)
      for (std::size_t l = 0; l < xhat.length(); ++l) {
        const double g = grad_out(b, c, l);
        grad_x(b, c, l) = cached_training_
                              ? scale * (g - sum_g / count - xhat(b, c, l) * sum_gx / count)
                              : scale * g;
      }
  }
  return grad_x;
}

// ---------------------------------------------------------------- Activation

Activation::Activation(ActivationKind kind, double alpha) : kind_(kind), alpha_(alpha) {
  if (kind == ActivationKind::Relu) alpha_ = 0.0;
}

Tensor3 Activation::forward(const Tensor3& x, Mode) {
  Tensor3 y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : alpha_ * v;
  input_ = x;
  return y;
}

Tensor3 Activation::backward(const Tensor3& grad_out) {
  const Tensor3& x = require_cache(input_, "Activation");
  require_same_shape(x, grad_out, "Activation");
  Tensor3 g = grad_out;
  const auto xs = x.data();
  auto gs = g.data();
  for (std::size_t i = 0; i < gs.size(); ++i) gs[i] *= xs[i] > 0.0 ? 1.0 : alpha_;
  return g;
}

// ---------------------------------------------------------------- Flatten

Tensor3 Flatten::forward(const Tensor3& x, Mode) {
  channels_ = x.channels();
  length_ = x.length();
  return x.reshaped(x.channels() * x.length(), 1);
}

Tensor3 Flatten::backward(const Tensor3& grad_out) {
  if (channels_ == 0) throw std::logic_error("Flatten: backward called before forward");
  return grad_out.reshaped(channels_, length_);
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features)
    : weight("weight", {out_features, in_features}),
      bias("bias", {out_features}),
      in_features_(in_features),
      out_features_(out_features) {
  if (in_features == 0 || out_features == 0) {
    throw std::invalid_argument("Dense: feature counts must be positive");
  }
}

Tensor3 Dense::forward(const Tensor3& x, Mode) {
  if (x.length() != 1 || x.channels() != in_features_) {
    throw std::invalid_argument("Dense: input " + x.shape_string() + " does not match (B x " +
                                std::to_string(in_features_) + " x 1)");
  }
  Tensor3 y(x.batch(), out_features_, 1);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    const auto in = x.sample(b);
    for (std::size_t o = 0; o < out_features_; ++o) {
      const double* w = &weight.value[o * in_features_];
      double acc = bias.value[o];
      for (std::size_t i = 0; i < in_features_; ++i) acc += w[i] * in[i];
      y(b, o, 0) = acc;
    }
  }
  input_ = x;
  return y;
}

Tensor3 Dense::backward(const Tensor3& grad_out) {
  const Tensor3& x = require_cache(input_, "Dense");
  if (grad_out.batch() != x.batch() || grad_out.channels() != out_features_ ||
      grad_out.length() != 1) {
    throw std::invalid_argument("Dense: grad_out shape " + grad_out.shape_string() +
                                " inconsistent with forward input " + x.shape_string());
  }
  std::fill(weight.grad.begin(), weight.grad.end(), 0.0);
  std::fill(bias.grad.begin(), bias.grad.end(), 0.0);
  Tensor3 grad_x(x.batch(), in_features_, 1);
  for (std::size_t b = 0; b < x.batch(); ++b) {
    const auto in = x.sample(b);
    for (std::size_t o = 0; o < out_features_; ++o) {
      const double g = grad_out(b, o, 0);
      if (g == 0.0) continue;
      bias.grad[o] += g;
      double* wg = &weight.grad[o * in_features_];
      const double* w = &weight.value[o * in_features_];
      for (std::size_t i = 0; i < in_features_; ++i) {
        wg[i] += g * in[i];
        grad_x(b, i, 0) += g * w[i];
      }
    }
  }
  return grad_x;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("Dropout: rate must be in [0, 1)");
}

Tensor3 Dropout::forward(const Tensor3& x, Mode mode) {
  mask_.assign(x.size(), 1.0);
  if (mode == Mode::Training && rate_ > 0.0) {
    const double keep_scale = 1.0 / (1.0 - rate_);
    for (auto& m : mask_) m = rng_.uniform() < rate_ ? 0.0 : keep_scale;
  }
  Tensor3 y = x;
  auto ys = y.data();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] *= mask_[i];
  return y;
}

Tensor3 Dropout::backward(const Tensor3& grad_out) {
  if (grad_out.size() != mask_.size()) {
    throw std::invalid_argument("Dropout: grad_out size does not match forward mask");
  }
  Tensor3 g = grad_out;
  auto gs = g.data();
  for (std::size_t i = 0; i < gs.size(); ++i) gs[i] *= mask_[i];
  return g;
}

}  // namespace pgd
