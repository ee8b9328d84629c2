#pragma once

#include <cstddef>
#include <vector>

#include "qfluct/matrix.hpp"

namespace qfluct {

struct HermitianEigensystem {
  std::vector<double> values;  // nondecreasing
  ComplexMatrix vectors;       // column k is the eigenvector of values[k]
};

// Deterministic Hermitian eigendecomposition. Within a degenerate cluster the
// eigenvectors are canonicalized from the cluster's projector alone: repeatedly
// take the computational basis vector with the largest residual after
// projection and orthogonalization, make its first nonzero component real and
// positive, then order the cluster by the index of that leading component.
// For A proportional to the identity this yields the computational basis.
HermitianEigensystem herm_eig(const ComplexMatrix& a);

// V diag(lambda^alpha) V^dagger. Eigenvalues at or below 1e-12 * lambda_max are
// treated as exact zeros, so negative alpha gives the pseudo-power on the support.
ComplexMatrix mat_power(const ComplexMatrix& a, double alpha);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Trace out every factor except `keep` (0-based, first factor is the slow index).
ComplexMatrix partial_trace(const ComplexMatrix& a, const std::vector<std::size_t>& dims,
                            std::size_t keep);

// Tr rho (ln rho - ln sigma) in nats. Returns +infinity when rho carries
// weight > 1e-10 outside the support of sigma.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

double von_neumann_entropy(const DensityMatrix& rho);
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace qfluct
