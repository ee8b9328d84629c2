#include <doctest.h>

#include "helpers.hpp"
#include "qfluct/errors.hpp"

using namespace qfluct;
using namespace testutil;

TEST_CASE("vectorize") {
  const OperatorVector v = vectorize(ComplexMatrix::unit(2, 0, 1));
  for (std::size_t k = 0; k < 4; ++k) CHECK(v[k] == (k == 1 ? cplx(1.0) : cplx(0.0)));
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix a = random_matrix(3, 3, rng), b = random_matrix(3, 3, rng);
    CHECK(max_abs(devectorize(vectorize(a)), a) == 0.0);
    CHECK(std::abs(inner(vectorize(a), vectorize(b)) - (a.adjoint() * b).trace()) < 1e-12);
    const OperatorVector va = vectorize(a);
    std::vector<cplx> acc(9, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        const cplx c = inner(vectorize(ComplexMatrix::unit(3, i, j)), va);
        const OperatorVector u = vectorize(ComplexMatrix::unit(3, i, j));
        for (std::size_t k = 0; k < 9; ++k) acc[k] += c * u[k];
      }
    for (std::size_t k = 0; k < 9; ++k) CHECK(std::abs(acc[k] - va[k]) < 1e-12);
  }
}

TEST_CASE("super_from_kraus") {
  CHECK(max_abs(super_from_kraus({ComplexMatrix::identity(2)}).matrix(), Superoperator::identity(2).matrix()) == 0.0);
  Rng rng(2);
  const Superoperator u = super_from_kraus({random_unitary(3, rng)}).checked();
  CHECK(u.tp_flag() == Tri::yes);
  CHECK(u.cp_flag() == Tri::yes);
  const ComplexMatrix out = apply(amplitude_damping(0.3), ComplexMatrix::diagonal({0.0, 1.0}));
  CHECK(max_abs(out, ComplexMatrix::diagonal({0.3, 0.7})) < 1e-15);
}

TEST_CASE("adjoint_super") {
  Rng rng(3);
  const ComplexMatrix u = random_unitary(2, rng);
  CHECK(max_abs(adjoint_super(unitary_channel(u)).matrix(), unitary_channel(u.adjoint()).matrix()) < 1e-14);
  const Superoperator ch = random_channel(3, 2, rng);
  CHECK(max_abs(apply(adjoint_super(ch), ComplexMatrix::identity(3)), ComplexMatrix::identity(3)) < 1e-11);
  const ComplexMatrix a = random_matrix(3, 3, rng), b = random_matrix(3, 3, rng);
  CHECK(std::abs(hs_inner(a, apply(ch, b)) - hs_inner(apply(adjoint_super(ch), a), b)) < 1e-12);
}

TEST_CASE("choi") {
  const ComplexMatrix c = choi_of(Superoperator::identity(2));
  ComplexMatrix expect(4, 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) expect += kron(ComplexMatrix::unit(2, i, j), ComplexMatrix::unit(2, i, j));
  CHECK(max_abs(c, expect) == 0.0);
  CHECK(herm_eig(c).values.back() == doctest::Approx(2.0));

  Rng rng(4);
  const Superoperator ch = random_channel(2, 3, rng);
  CHECK(tp_residual(ch) < 1e-11);
  CHECK(is_cp(ch));
  CHECK(is_tp(ch));

  ComplexMatrix tmat(4, 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) tmat(j * 2 + i, i * 2 + j) = 1.0;
  const Superoperator transpose(2, 2, tmat);
  CHECK(choi_min_eigenvalue(transpose) == doctest::Approx(-1.0));
  CHECK_FALSE(is_cp(transpose));
  CHECK(transpose.checked().cp_flag() == Tri::no);
}

TEST_CASE("compose and kraus_from_choi") {
  Rng rng(5);
  const Superoperator a = random_channel(2, 2, rng), b = random_channel(2, 2, rng);
  const ComplexMatrix x = random_density(2, rng).matrix();
  CHECK(max_abs(apply(compose(a, b), x), apply(a, apply(b, x))) < 1e-13);
  const auto ks = kraus_from_choi(choi_of(a), 2, 2);
  CHECK(max_abs(super_from_kraus(ks).matrix(), a.matrix()) < 1e-12);
  CHECK_THROWS_AS(compose(a, random_channel(3, 2, rng)), InvalidArgument);
}
