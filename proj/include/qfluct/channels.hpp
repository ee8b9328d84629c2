#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qfluct/matrix.hpp"
#include "qfluct/opstate.hpp"

namespace qfluct {

using Rng = std::mt19937_64;

// Orthonormal basis {|x>} stored as the columns of a unitary matrix.
class MeasurementBasis {
 public:
  explicit MeasurementBasis(ComplexMatrix kets);
  static MeasurementBasis computational(std::size_t d);

  std::size_t dim() const { return kets_.rows(); }
  const ComplexMatrix& kets() const { return kets_; }
  const std::vector<cplx>& ket(std::size_t x) const { return cols_[x]; }
  ComplexMatrix projector(std::size_t x) const;
  // |x><y|
  ComplexMatrix unit(std::size_t x, std::size_t y) const;
  // (Pi^x | O) = <x|O|x>
  cplx weight(std::size_t x, const ComplexMatrix& o) const;
  // Diagonal of O in this basis.
  std::vector<double> diagonal_of(const ComplexMatrix& o) const;
  // Largest off-diagonal modulus of O in this basis.
  double offdiag_in(const ComplexMatrix& o) const;

 private:
  ComplexMatrix kets_;
  std::vector<std::vector<cplx>> cols_;
};

// Canonical eigenbasis (see herm_eig) together with its eigenvalues.
struct Eigenbasis {
  MeasurementBasis basis;
  std::vector<double> values;
};
Eigenbasis eigenbasis_of(const ComplexMatrix& a);
// Uses `basis` if it diagonalizes `a` to 1e-11, reading the values off the diagonal.
Eigenbasis eigenbasis_in(const ComplexMatrix& a, const MeasurementBasis& basis);

// Reference state gamma for one step and its image N(gamma), each with the
// eigenbasis used for the quasi indices (i, j) and (k', l').
struct ReferencePair {
  DensityMatrix gamma;
  DensityMatrix gamma_out;
  Eigenbasis in;
  Eigenbasis out;
};

// gamma <- (1 - eps) gamma + eps I/d when its smallest eigenvalue is below threshold.
DensityMatrix regularize(const DensityMatrix& gamma, double eps = 1e-8, double threshold = 1e-10);

// Regularizes gamma, computes N(gamma) and the canonical eigenbases. Optional
// bases override the canonical choice but must diagonalize their states.
ReferencePair make_reference_pair(const Superoperator& n, const DensityMatrix& gamma,
                                  const std::optional<MeasurementBasis>& in_basis = std::nullopt,
                                  const std::optional<MeasurementBasis>& out_basis = std::nullopt);

// X -> O^alpha X O^alpha (pseudo-power on the support for alpha < 0).
Superoperator rescaling_map(const ComplexMatrix& o, double alpha);

// sqrt(g_i^alpha g_j^alpha) for eigenvalues g of gamma in canonical order.
double z_factor(const DensityMatrix& gamma, double alpha, std::size_t i, std::size_t j);
double z_factor(const std::vector<double>& eigenvalues, double alpha, std::size_t i, std::size_t j);

// J^{1/2}_gamma o N^dagger o J^{-1/2}_{N(gamma)}
Superoperator petz_recovery(const Superoperator& n, const DensityMatrix& gamma);

Superoperator dephasing_map(const MeasurementBasis& basis);
Superoperator unitary_channel(const ComplexMatrix& u);

ComplexMatrix random_unitary(std::size_t d, Rng& rng);
ComplexMatrix random_unitary(std::size_t d, std::uint64_t seed);
// Stinespring: rho -> Tr_E[U (rho (x) |0><0|) U^dagger] with Haar U on d * env_dim.
Superoperator random_channel(std::size_t d, std::size_t env_dim, Rng& rng);
Superoperator random_channel(std::size_t d, std::size_t env_dim, std::uint64_t seed);
// Full-rank Ginibre state.
DensityMatrix random_density(std::size_t d, Rng& rng);
MeasurementBasis random_basis(std::size_t d, Rng& rng);

// Unitary sending basis `from` ket x to phases[x] times basis `to` ket perm[x].
ComplexMatrix basis_permuting_unitary(const MeasurementBasis& from, const MeasurementBasis& to,
                                      const std::vector<std::size_t>& perm,
                                      const std::vector<double>& phases);

}  // namespace qfluct
