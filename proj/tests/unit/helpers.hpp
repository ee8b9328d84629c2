#pragma once

#include <cmath>

#include "qfluct/channels.hpp"
#include "qfluct/linalg.hpp"

namespace testutil {

using namespace qfluct;

inline ComplexMatrix hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  return ComplexMatrix{{s, s}, {s, -s}};
}

inline ComplexMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const double re = g(rng);
      m(i, j) = cplx(re, g(rng));
    }
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t d, Rng& rng) {
  const ComplexMatrix a = random_matrix(d, d, rng);
  return (a + a.adjoint()) * cplx(0.5);
}

inline double max_abs(const ComplexMatrix& a, const ComplexMatrix& b) {
  double w = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) w = std::max(w, std::abs(a(i, j) - b(i, j)));
  return w;
}

inline Superoperator amplitude_damping(double g) {
  const ComplexMatrix k0{{1.0, 0.0}, {0.0, std::sqrt(1.0 - g)}};
  const ComplexMatrix k1{{0.0, std::sqrt(g)}, {0.0, 0.0}};
  return super_from_kraus({k0, k1});
}

}  // namespace testutil
