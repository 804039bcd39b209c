#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace pgd {

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// xoshiro256** seeded through splitmix64.
///
/// Output depends only on the seed and the number of draws, so streams
/// reproduce across compilers and platforms. Normal draws use the
/// Box-Muller transform on two uniforms and return the cosine branch only
/// (one normal per two uniforms), which keeps the stream position simple
/// to reason about.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform();
  double normal(double mean = 0.0, double std = 1.0);
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  std::vector<double> uniform_vector(std::size_t n);
  /// Throws std::invalid_argument for negative std.
  std::vector<double> normal_vector(std::size_t n, double mean, double std);

  /// Fisher-Yates shuffle of [0, n).
  std::vector<std::size_t> permutation(std::size_t n);

  /// Independent stream for child `index`; see derive_seed.
  Rng child(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

  std::array<std::uint64_t, 4> state() const { return state_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

/// child_seed = splitmix64 mix of (parent_seed xor golden-ratio * (index + 1)).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace pgd
