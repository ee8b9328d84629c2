#include <doctest.h>

#include "helpers.hpp"
#include "qfluct/errors.hpp"
#include "qfluct/kernels.hpp"

using namespace qfluct;
using namespace testutil;

TEST_CASE("kernel tables agree on gemm and dotc") {
  const auto* avx = kernels::avx2_table();
  if (avx == nullptr) {
    MESSAGE("avx2 kernels unavailable on this machine");
    return;
  }
  const auto& sc = kernels::scalar_table();
  Rng rng(11);
  for (std::size_t m : {1u, 2u, 3u, 5u, 8u, 16u})
    for (std::size_t k : {1u, 3u, 4u, 9u})
      for (std::size_t n : {1u, 2u, 7u, 16u}) {
        const ComplexMatrix a = random_matrix(m, k, rng);
        const ComplexMatrix b = random_matrix(k, n, rng);
        std::vector<cplx> c1(m * n), c2(m * n);
        sc.gemm(a.data(), b.data(), c1.data(), m, k, n);
        avx->gemm(a.data(), b.data(), c2.data(), m, k, n);
        for (std::size_t i = 0; i < m * n; ++i) CHECK(std::abs(c1[i] - c2[i]) <= 1e-12 * (1.0 + std::abs(c1[i])));
      }
  for (std::size_t len : {1u, 2u, 3u, 4u, 5u, 17u, 64u}) {
    const ComplexMatrix a = random_matrix(1, len, rng), b = random_matrix(1, len, rng);
    const cplx x = sc.dotc(a.data(), b.data(), len), y = avx->dotc(a.data(), b.data(), len);
    CHECK(std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)));
  }
}

TEST_CASE("kernel selection") {
  const std::string before = kernels::active().name;
  kernels::select("scalar");
  CHECK(std::string(kernels::active().name) == "scalar");
  CHECK_THROWS_AS(kernels::select("nonsense"), InvalidArgument);
  kernels::select(before);
}

TEST_CASE("matrix products match a naive triple loop") {
  Rng rng(5);
  const ComplexMatrix a = random_matrix(4, 6, rng), b = random_matrix(6, 3, rng);
  const ComplexMatrix c = a * b;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < 6; ++k) s += a(i, k) * b(k, j);
      CHECK(std::abs(c(i, j) - s) < 1e-12);
    }
}
