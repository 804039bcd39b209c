#pragma once

// Small seeded models and datasets shared by the unit tests and the acceptance run.

#include <memory>
#include <vector>

#include "pgdetect/dataset.hpp"
#include "pgdetect/network.hpp"

namespace fixture {

/// Input, labels and a PGN4 with perturbed BN affine parameters so every
/// tensor has a non-trivial gradient.
struct GradCase {
  pgd::Network model;
  pgd::Tensor3 x;
  std::vector<int> labels;
};

inline GradCase pgn4_grad_case(std::uint64_t seed, std::size_t length = 12, std::size_t batch = 4) {
  pgd::Rng rng(seed);
  GradCase g{pgd::pgn4_init(length, rng), pgd::Tensor3(batch, 1, length, rng.normal_vector(batch * length, 0, 1)), {}};
  for (std::size_t i = 0; i < batch; ++i) g.labels.push_back(static_cast<int>(i % 2));
  for (auto* p : g.model.params()) {
    if (p->name == "gamma" || p->name == "beta" || p->name == "bias") {
      for (double& v : p->value) v += 0.3 * rng.normal();
    }
  }
  return g;
}

/// Flatten -> Dense -> ReLU -> Dense.
inline GradCase dense_grad_case(std::uint64_t seed, std::size_t length = 12, std::size_t batch = 4) {
  pgd::Rng rng(seed);
  pgd::Architecture arch;
  arch.kind = "custom";
  arch.input_length = length;
  std::vector<std::unique_ptr<pgd::Layer>> layers;
  layers.push_back(std::make_unique<pgd::Flatten>());
  auto d1 = std::make_unique<pgd::Dense>(length, 8);
  pgd::he_init(d1->weight, length, rng);
  d1->bias.value = rng.normal_vector(8, 0, 0.1);
  layers.push_back(std::move(d1));
  layers.push_back(std::make_unique<pgd::Activation>(pgd::ActivationKind::Relu));
  auto d2 = std::make_unique<pgd::Dense>(8, 1);
  pgd::he_init(d2->weight, 8, rng);
  layers.push_back(std::move(d2));
  GradCase g{pgd::Network(arch, std::move(layers)),
             pgd::Tensor3(batch, 1, length, rng.normal_vector(batch * length, 0, 1)), {}};
  for (std::size_t i = 0; i < batch; ++i) g.labels.push_back(static_cast<int>((i + 1) % 2));
  return g;
}

/// Conv (stride 2) -> ReLU -> Conv (stride 2) collapsing a length-4 input to one logit.
inline GradCase conv_grad_case(std::uint64_t seed, std::size_t batch = 4) {
  pgd::Rng rng(seed);
  pgd::Architecture arch;
  arch.kind = "custom";
  arch.input_length = 4;
  std::vector<std::unique_ptr<pgd::Layer>> layers;
  auto c1 = std::make_unique<pgd::Conv1d>(1, 3, 3, 2);
  pgd::he_init(c1->weight, 3, rng);
  c1->bias.value = rng.normal_vector(3, 0, 0.1);
  layers.push_back(std::move(c1));
  layers.push_back(std::make_unique<pgd::Activation>(pgd::ActivationKind::Relu));
  auto c2 = std::make_unique<pgd::Conv1d>(3, 1, 3, 2);
  pgd::he_init(c2->weight, 9, rng);
  layers.push_back(std::move(c2));
  GradCase g{pgd::Network(arch, std::move(layers)), pgd::Tensor3(batch, 1, 4, rng.normal_vector(batch * 4, 0, 1)),
             {}};
  for (std::size_t i = 0; i < batch; ++i) g.labels.push_back(static_cast<int>(i % 2));
  return g;
}

/// Two Gaussian blobs far apart along every axis: linearly separable with a wide margin.
inline pgd::DatasetTable separable_table(std::size_t rows = 200, std::size_t cols = 5, std::uint64_t seed = 1) {
  pgd::Rng rng(seed);
  pgd::DatasetTable t;
  for (std::size_t c = 0; c < cols; ++c) t.feature_names.push_back("x" + std::to_string(c));
  t.features = pgd::Matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = static_cast<int>(r % 2);
    t.labels.push_back(y);
    for (std::size_t c = 0; c < cols; ++c) t.features(r, c) = (y == 1 ? 2.0 : -2.0) + 0.5 * rng.normal();
  }
  return t;
}

/// Feature matrix as single-channel signals.
inline pgd::Tensor3 signals(const pgd::DatasetTable& t) { return pgd::rows_as_signals(t.features); }

}  // namespace fixture
