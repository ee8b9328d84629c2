#include <doctest.h>

#include "helpers.hpp"
#include "qfluct/errors.hpp"

using namespace qfluct;
using namespace testutil;

TEST_CASE("matrix construction rejects bad input") {
  CHECK_THROWS_AS(ComplexMatrix(0, 2), InvalidArgument);
  CHECK_THROWS_AS(ComplexMatrix(1, 1, {cplx(std::nan(""), 0.0)}), InvalidArgument);
  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix::diagonal({0.5, 0.6})), InvalidArgument);
  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix::diagonal({1.2, -0.2})), InvalidArgument);
}

TEST_CASE("herm_eig") {
  SUBCASE("identity") {
    const auto e = herm_eig(ComplexMatrix::identity(2));
    CHECK(e.values[0] == doctest::Approx(1.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(max_abs(e.vectors, ComplexMatrix::identity(2)) < 1e-15);
  }
  SUBCASE("pauli z") {
    const auto e = herm_eig(ComplexMatrix::diagonal({1.0, -1.0}));
    CHECK(e.values[0] == doctest::Approx(-1.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
  }
  SUBCASE("random reconstruction") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      const ComplexMatrix a = random_hermitian(4, rng);
      const auto e = herm_eig(a);
      std::vector<double> lam = e.values;
      const ComplexMatrix rec = e.vectors * ComplexMatrix::diagonal(lam) * e.vectors.adjoint();
      CHECK(frobenius_distance(rec, a) <= 1e-12 * a.frobenius_norm());
      CHECK(frobenius_distance(e.vectors.adjoint() * e.vectors, ComplexMatrix::identity(4)) <= 1e-12);
      for (std::size_t k = 1; k < 4; ++k) CHECK(lam[k - 1] <= lam[k]);
    }
  }
  SUBCASE("degenerate cluster is canonical") {
    Rng rng(4);
    const ComplexMatrix u = random_unitary(3, rng);
    const ComplexMatrix a = u * ComplexMatrix::diagonal({0.2, 0.2, 0.6}) * u.adjoint();
    const auto e1 = herm_eig(a);
    const auto e2 = herm_eig(a.transpose().transpose());
    CHECK(max_abs(e1.vectors, e2.vectors) == 0.0);
    for (std::size_t k = 0; k < 2; ++k) {
      std::size_t lead = 0;
      while (std::abs(e1.vectors(lead, k)) < 1e-12) ++lead;
      CHECK(std::abs(e1.vectors(lead, k).imag()) < 1e-14);
      CHECK(e1.vectors(lead, k).real() > 0.0);
    }
  }
  SUBCASE("rejects non-Hermitian input") {
    CHECK_THROWS_AS(herm_eig(ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}), InvalidArgument);
    CHECK_THROWS_AS(herm_eig(ComplexMatrix(2, 3)), InvalidArgument);
  }
}

TEST_CASE("mat_power") {
  CHECK(max_abs(mat_power(ComplexMatrix::identity(3), 0.5), ComplexMatrix::identity(3)) < 1e-14);
  CHECK(max_abs(mat_power(ComplexMatrix::diagonal({4.0, 1.0}), 0.5), ComplexMatrix::diagonal({2.0, 1.0})) < 1e-14);
  Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix g = random_density(3, rng).matrix();
    const ComplexMatrix r = mat_power(g, 0.5);
    CHECK(max_abs(r * r, g) < 1e-11);
    CHECK(max_abs(mat_power(g, 0.3) * mat_power(g, -0.8), mat_power(g, -0.5)) < 1e-10);
  }
  SUBCASE("pseudo-power on the support") {
    const ComplexMatrix p = ComplexMatrix::diagonal({0.25, 0.0});
    CHECK(max_abs(mat_power(p, -0.5), ComplexMatrix::diagonal({2.0, 0.0})) < 1e-14);
  }
  CHECK_THROWS_AS(mat_power(ComplexMatrix::diagonal({1.0, -0.5}), 0.5), InvalidArgument);
}

TEST_CASE("kron") {
  CHECK(max_abs(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)), ComplexMatrix::identity(4)) == 0.0);
  CHECK(max_abs(kron(ComplexMatrix::diagonal({1.0, 2.0}), ComplexMatrix::identity(2)),
                ComplexMatrix::diagonal({1.0, 1.0, 2.0, 2.0})) == 0.0);
  Rng rng(9);
  const auto a = random_matrix(2, 2, rng), b = random_matrix(2, 2, rng), c = random_matrix(2, 2, rng),
             d = random_matrix(2, 2, rng);
  CHECK(max_abs(kron(a, b) * kron(c, d), kron(a * c, b * d)) < 1e-12);
}

TEST_CASE("partial_trace") {
  Rng rng(10);
  const ComplexMatrix rho = random_density(2, rng).matrix();
  const ComplexMatrix sig = random_matrix(3, 3, rng);
  CHECK(max_abs(partial_trace(kron(rho, sig), {2, 3}, 0), rho * sig.trace()) < 1e-12);
  CHECK(max_abs(partial_trace(kron(sig, rho), {3, 2}, 1), rho * sig.trace()) < 1e-12);
  std::vector<cplx> bell{1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
  const ComplexMatrix bp = ComplexMatrix::outer(bell, bell);
  CHECK(max_abs(partial_trace(bp, {2, 2}, 0), ComplexMatrix::identity(2) * cplx(0.5)) < 1e-15);
  CHECK(max_abs(partial_trace(bp, {2, 2}, 1), ComplexMatrix::identity(2) * cplx(0.5)) < 1e-15);
  const ComplexMatrix m = random_matrix(6, 6, rng);
  CHECK(std::abs(partial_trace(m, {2, 3}, 0).trace() - m.trace()) < 1e-12);
  CHECK_THROWS_AS(partial_trace(m, {2, 2}, 0), InvalidArgument);
}

TEST_CASE("relative_entropy") {
  Rng rng(12);
  const DensityMatrix r = random_density(3, rng);
  CHECK(std::abs(relative_entropy(r, r)) < 1e-12);
  CHECK(relative_entropy(DensityMatrix(ComplexMatrix::diagonal({1.0, 0.0})), DensityMatrix::maximally_mixed(2)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::isinf(relative_entropy(DensityMatrix::maximally_mixed(2), DensityMatrix(ComplexMatrix::diagonal({1.0, 0.0})))));
  SUBCASE("spectral oracle for qubits") {
    for (int t = 0; t < 20; ++t) {
      const DensityMatrix a = random_density(2, rng), b = random_density(2, rng);
      const auto ea = herm_eig(a.matrix()), eb = herm_eig(b.matrix());
      double s = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        s += ea.values[i] * std::log(ea.values[i]);
        for (std::size_t j = 0; j < 2; ++j)
          s -= ea.values[i] * std::norm(dotc(ea.vectors.column(i), eb.vectors.column(j))) * std::log(eb.values[j]);
      }
      CHECK(std::abs(relative_entropy(a, b) - s) < 1e-12);
    }
  }
  SUBCASE("nonnegative") {
    double lowest = 0.0;
    for (int t = 0; t < 1000; ++t)
      lowest = std::min(lowest, relative_entropy(random_density(2 + t % 2, rng), random_density(2 + t % 2, rng)));
    CHECK(lowest >= -1e-12);
  }
}
