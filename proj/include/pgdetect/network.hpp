#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pgdetect/container.hpp"
#include "pgdetect/layers.hpp"
#include "pgdetect/rng.hpp"
#include "pgdetect/tensor.hpp"

namespace pgd {

/// Construction recipe; enough to rebuild the layer stack before loading weights.
struct Architecture {
  std::string kind = "pgn4";  // "pgn4", "mlp", or "custom"
  std::size_t input_length = 0;
  ActivationKind activation = ActivationKind::Relu;
  double leaky_alpha = 0.01;
  double dropout_rate = 0.0;
  std::size_t hidden_units = 128;
};

/// PGN4 conv block table: (channels, stride) for C#1..C#4, kernel 3, same padding.
struct ConvSpec {
  std::size_t channels;
  std::size_t stride;
};
inline constexpr ConvSpec kPgn4Blocks[4] = {{16, 1}, {16, 2}, {32, 1}, {32, 2}};
inline constexpr std::size_t kPgn4Kernel = 3;
inline constexpr std::size_t kPgn4DenseUnits = 128;

/// Flattened width after the four PGN4 blocks: 32 * ceil(ceil(F/2)/2).
std::size_t pgn4_flatten_width(std::size_t input_length);

/// Feed-forward stack ending in one logit; probabilities are sigmoid(logit).
///
/// Input is always (batch, 1, input_length). backward() differentiates the
/// mean binary cross-entropy over the last forward batch.
class Network {
 public:
  Network() = default;
  Network(Architecture arch, std::vector<std::unique_ptr<Layer>> layers);
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const Architecture& architecture() const { return arch_; }
  std::size_t input_length() const { return arch_.input_length; }
  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
  std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }

  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  /// Raw logits, one per sample.
  std::vector<double> forward_logits(const Tensor3& x);
  /// sigmoid(logits) in the current mode.
  std::vector<double> forward(const Tensor3& x);
  std::vector<double> predict(const Tensor3& x);  // inference mode, model mode untouched

  /// Mean BCE of the cached forward batch against `labels`; fills every Param::grad.
  double backward(const std::vector<int>& labels);

  /// Forward in the current mode and return the mean BCE (no gradients).
  double loss(const Tensor3& x, const std::vector<int>& labels);

  std::vector<Param*> params();
  std::vector<Buffer*> buffers();
  std::size_t parameter_count();

  /// Layer recipe and architecture in the header; parameters then buffers in the payload.
  Container to_container() const;
  static Network from_container(const Container& c);
  void save(const std::filesystem::path& path) const;
  static Network load(const std::filesystem::path& path);

 private:
  Architecture arch_;
  std::vector<std::unique_ptr<Layer>> layers_;
  Mode mode_ = Mode::Training;
  std::optional<std::vector<double>> cached_logits_;
};

/// PGN4: 4 x (conv -> batch-norm -> activation), flatten, dense(128),
/// activation, optional dropout, dense(1). Throws for input_length < 4.
Network pgn4_init(std::size_t input_length, Rng& rng,
                  ActivationKind activation = ActivationKind::Relu, double dropout_rate = 0.0);
Network pgn4_init(const Architecture& arch, Rng& rng);

/// Plain MLP baseline: flatten, dense(hidden), activation, dense(1).
Network mlp_init(std::size_t input_length, Rng& rng, std::size_t hidden_units = 128,
                 ActivationKind activation = ActivationKind::Relu);

/// Rebuild the untrained layer stack for `arch` (used by load()).
Network build_network(const Architecture& arch, Rng& rng);

double sigmoid(double z);

}  // namespace pgd
