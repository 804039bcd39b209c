#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pgdetect/dataset.hpp"
#include "pgdetect/layers.hpp"
#include "pgdetect/network.hpp"
#include "pgdetect/tensor.hpp"

namespace pgd {

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad;  // d(mean loss)/dp
};

/// Mean binary cross-entropy with p clamped to [1e-12, 1 - 1e-12].
BceResult bce_loss(std::span<const double> p, std::span<const int> y);

struct TrainConfig {
  double learning_rate = 2e-4;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;

  /// Throws std::invalid_argument on any out-of-range field.
  void validate() const;
};

/// First/second moment buffers, one pair per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
};

/// One bias-corrected Adam update over every parameter using its current grad.
void adam_step(const std::vector<Param*>& params, AdamState& state, const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double valid_loss = 0.0;
  double valid_accuracy = 0.0;
  double valid_roc_auc = 0.0;  // NaN when the validation set has a single class
  double valid_pr_auc = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t adam_steps = 0;

  std::string to_csv() const;
};

/// Contiguous batch boundaries over n rows; a trailing batch of one row is
/// merged into the previous batch so batch-norm always sees two values.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n,
                                                              std::size_t batch_size);

/// Minibatch Adam on mean BCE. Leaves the model in inference mode.
/// `valid` may be empty, in which case validation fields are NaN.
TrainHistory train(Network& model, const DatasetTable& train_set, const DatasetTable& valid,
                   const TrainConfig& config);

struct GradientCheckEntry {
  std::string name;  // "<layer index>.<layer kind>.<param>"
  std::size_t size = 0;
  double max_abs_error = 0.0;
  double relative_error = 0.0;
};

struct GradientCheckReport {
  std::vector<GradientCheckEntry> entries;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Per-tensor relative error ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2, floor).
/// The floor keeps tensors whose true gradient is zero (conv bias feeding
/// batch-norm) from turning round-off into a large ratio.
inline constexpr double kGradCheckNormFloor = 1e-6;

/// Central differences on the mean BCE of (x, labels) in training mode.
/// `tamper`, when set, edits analytic gradients before comparison (fault injection).
GradientCheckReport gradient_check(const Network& model, const Tensor3& x,
                                   const std::vector<int>& labels, double h, double tolerance,
                                   const std::function<void(Network&)>& tamper = {});

}  // namespace pgd
