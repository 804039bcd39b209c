#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pgdetect/rng.hpp"
#include "pgdetect/tensor.hpp"

using pgd::Matrix;
using pgd::Rng;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  return Matrix(r, c, rng.normal_vector(r * c, 0.0, 1.0));
}

std::vector<std::vector<double>> nested(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

}  // namespace

TEST_CASE("matmul identity and dot product") {
  const Matrix a(2, 2, {1, 2, 3, 4});
  CHECK(pgd::matmul(Matrix::identity(2), a) == a);
  const Matrix row(1, 2, {1, 2});
  const Matrix col(2, 1, {3, 4});
  CHECK(pgd::matmul(row, col) == Matrix(1, 1, {11}));
}

TEST_CASE("matmul matches a triple-loop oracle") {
  Rng rng(7);
  const Matrix a = random_matrix(5, 4, rng);
  const Matrix b = random_matrix(4, 3, rng);
  const Matrix c = pgd::matmul(a, b);
  const auto expected = oracle::triple_loop_matmul(nested(a), nested(b));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(c(i, j) - expected[i][j]) < 1e-12);
}

TEST_CASE("matmul rejects mismatched shapes and names both") {
  const Matrix a(2, 3);
  const Matrix b(2, 3);
  try {
    pgd::matmul(a, b);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(2x3) * (2x3)") != std::string::npos);
  }
}

TEST_CASE("matmul is associative on random triples") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(6), m = 1 + rng.below(6), p = 1 + rng.below(6), q = 1 + rng.below(6);
    const Matrix a = random_matrix(n, m, rng), b = random_matrix(m, p, rng), c = random_matrix(p, q, rng);
    const Matrix left = pgd::matmul(pgd::matmul(a, b), c);
    const Matrix right = pgd::matmul(a, pgd::matmul(b, c));
    for (std::size_t i = 0; i < left.data().size(); ++i) {
      const double scale = std::max(1.0, std::abs(left.data()[i]));
      CHECK(std::abs(left.data()[i] - right.data()[i]) / scale < 1e-9);
    }
  }
}

TEST_CASE("constructors reject mismatched data lengths") {
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(pgd::Tensor3(1, 2, 3, std::vector<double>(5)), std::invalid_argument);
  CHECK_THROWS_AS(pgd::Tensor3(1, 2, 3).reshaped(4, 2), std::invalid_argument);
}

TEST_CASE("tensor layout is batch, channel, position") {
  pgd::Tensor3 t(2, 3, 4);
  t(1, 2, 3) = 5.0;
  CHECK(t.data()[(1 * 3 + 2) * 4 + 3] == 5.0);
  const auto flat = t.reshaped(12, 1);
  CHECK(flat(1, 11, 0) == 5.0);
}

TEST_CASE("rng uniform: empty, determinism, mean") {
  Rng a(3), b(3);
  CHECK(a.uniform_vector(0).empty());
  CHECK(a.uniform_vector(100) == b.uniform_vector(100));

  Rng rng(123);
  const auto u = rng.uniform_vector(100000);
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / static_cast<double>(u.size());
  CHECK(std::abs(mean - 0.5) < 0.01);
  CHECK(*std::min_element(u.begin(), u.end()) >= 0.0);
  CHECK(*std::max_element(u.begin(), u.end()) < 1.0);
}

TEST_CASE("rng normal: degenerate std, determinism, moments, errors") {
  Rng rng(5);
  for (double v : rng.normal_vector(10, 3.5, 0.0)) CHECK(v == 3.5);
  Rng a(9), b(9);
  CHECK(a.normal_vector(50, 0, 1) == b.normal_vector(50, 0, 1));
  CHECK_THROWS_AS(rng.normal_vector(3, 0, -1), std::invalid_argument);

  Rng big(2024);
  const auto z = big.normal_vector(100000, 0.0, 1.0);
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / 1e5;
  double var = 0;
  for (double v : z) var += (v - mean) * (v - mean);
  CHECK(std::abs(std::sqrt(var / 1e5) - 1.0) < 0.02);
}

TEST_CASE("rng streams from distinct seeds differ early") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng a(s), b(s + 1);
    bool differs = false;
    for (int i = 0; i < 16; ++i) differs = differs || a.next_u64() != b.next_u64();
    CHECK(differs);
  }
}

TEST_CASE("rng output is pinned for cross-platform reproducibility") {
  // splitmix64(0) first output is a published constant.
  std::uint64_t s = 0;
  CHECK(pgd::splitmix64(s) == 0xE220A8397B1DCDAFULL);
  Rng a(42), b(42);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(pgd::derive_seed(42, 0) != pgd::derive_seed(42, 1));
  CHECK(Rng(1).child(3).next_u64() == Rng(pgd::derive_seed(1, 3)).next_u64());
}

TEST_CASE("permutation is a shuffle of [0, n)") {
  Rng rng(8);
  auto p = rng.permutation(50);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(p[i] == i);
}
