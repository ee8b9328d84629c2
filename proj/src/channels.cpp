#include "qfluct/channels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfluct/errors.hpp"
#include "qfluct/linalg.hpp"

namespace qfluct {

MeasurementBasis::MeasurementBasis(ComplexMatrix kets) : kets_(std::move(kets)) {
  if (kets_.empty() || !kets_.square()) throw InvalidArgument("MeasurementBasis: need a square ket matrix");
  const std::size_t d = kets_.rows();
  if (frobenius_distance(kets_.adjoint() * kets_, ComplexMatrix::identity(d)) > 1e-12 * d)
    throw InvalidArgument("MeasurementBasis: kets are not orthonormal");
  for (std::size_t x = 0; x < d; ++x) cols_.push_back(kets_.column(x));
}

MeasurementBasis MeasurementBasis::computational(std::size_t d) {
  return MeasurementBasis(ComplexMatrix::identity(d));
}

ComplexMatrix MeasurementBasis::projector(std::size_t x) const {
  return ComplexMatrix::outer(cols_.at(x), cols_.at(x));
}

ComplexMatrix MeasurementBasis::unit(std::size_t x, std::size_t y) const {
  return ComplexMatrix::outer(cols_.at(x), cols_.at(y));
}

cplx MeasurementBasis::weight(std::size_t x, const ComplexMatrix& o) const {
  return sandwich(cols_.at(x), o, cols_.at(x));
}

std::vector<double> MeasurementBasis::diagonal_of(const ComplexMatrix& o) const {
  std::vector<double> out(dim());
  for (std::size_t x = 0; x < dim(); ++x) out[x] = weight(x, o).real();
  return out;
}

double MeasurementBasis::offdiag_in(const ComplexMatrix& o) const {
  return max_offdiag(kets_.adjoint() * o * kets_);
}

Eigenbasis eigenbasis_of(const ComplexMatrix& a) {
  auto eig = herm_eig(a);
  return {MeasurementBasis(std::move(eig.vectors)), std::move(eig.values)};
}

Eigenbasis eigenbasis_in(const ComplexMatrix& a, const MeasurementBasis& basis) {
  if (basis.dim() != a.rows()) throw InvalidArgument("eigenbasis_in: dimension mismatch");
  if (basis.offdiag_in(a) > 1e-11)
    throw InvalidArgument("eigenbasis_in: basis does not diagonalize the operator");
  return {basis, basis.diagonal_of(a)};
}

DensityMatrix regularize(const DensityMatrix& gamma, double eps, double threshold) {
  if (herm_eig(gamma.matrix()).values.front() >= threshold) return gamma;
  const std::size_t d = gamma.dim();
  return DensityMatrix::trusted(gamma.matrix() * cplx(1.0 - eps) +
                                ComplexMatrix::identity(d) * cplx(eps / static_cast<double>(d)));
}

ReferencePair make_reference_pair(const Superoperator& n, const DensityMatrix& gamma,
                                  const std::optional<MeasurementBasis>& in_basis,
                                  const std::optional<MeasurementBasis>& out_basis) {
  if (n.in_dim() != gamma.dim()) throw InvalidArgument("make_reference_pair: dimension mismatch");
  DensityMatrix g = regularize(gamma);
  DensityMatrix g_out = DensityMatrix::trusted(apply(n, g.matrix()));
  Eigenbasis in = in_basis ? eigenbasis_in(g.matrix(), *in_basis) : eigenbasis_of(g.matrix());
  Eigenbasis out = out_basis ? eigenbasis_in(g_out.matrix(), *out_basis) : eigenbasis_of(g_out.matrix());
  return {std::move(g), std::move(g_out), std::move(in), std::move(out)};
}

Superoperator rescaling_map(const ComplexMatrix& o, double alpha) {
  const ComplexMatrix p = mat_power(o, alpha);
  return Superoperator(o.rows(), o.rows(), kron(p, p.conjugate()), Tri::unchecked, Tri::yes);
}

double z_factor(const std::vector<double>& g, double alpha, std::size_t i, std::size_t j) {
  if (i >= g.size() || j >= g.size()) throw InvalidArgument("z_factor: index out of range");
  const double cutoff = 1e-12 * *std::max_element(g.begin(), g.end());
  if (alpha < 0.0 && (g[i] <= cutoff || g[j] <= cutoff))
    throw SupportViolation("z_factor: zero eigenvalue under a negative power; regularize the reference state");
  return std::sqrt(std::pow(std::max(g[i], 0.0), alpha) * std::pow(std::max(g[j], 0.0), alpha));
}

double z_factor(const DensityMatrix& gamma, double alpha, std::size_t i, std::size_t j) {
  return z_factor(herm_eig(gamma.matrix()).values, alpha, i, j);
}

Superoperator petz_recovery(const Superoperator& n, const DensityMatrix& gamma) {
  if (n.in_dim() != gamma.dim()) throw InvalidArgument("petz_recovery: dimension mismatch");
  const ComplexMatrix g_out = apply(n, gamma.matrix());
  const auto eig = herm_eig(g_out);
  if (eig.values.front() <= 1e-12 * eig.values.back())
    throw SupportViolation("petz_recovery: N(gamma) is rank deficient; regularize gamma first");
  const Superoperator j_in = rescaling_map(gamma.matrix(), 0.5);
  const Superoperator j_out = rescaling_map(g_out, -0.5);
  const Superoperator r = compose(j_in, compose(adjoint_super(n), j_out));
  return Superoperator(r.in_dim(), r.out_dim(), r.matrix(), Tri::unchecked, Tri::yes);
}

Superoperator dephasing_map(const MeasurementBasis& basis) {
  std::vector<ComplexMatrix> k;
  for (std::size_t x = 0; x < basis.dim(); ++x) k.push_back(basis.projector(x));
  return super_from_kraus(k);
}

Superoperator unitary_channel(const ComplexMatrix& u) { return super_from_kraus({u}); }

ComplexMatrix random_unitary(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  // Gaussian columns, then modified Gram-Schmidt (QR with positive R diagonal).
  std::vector<std::vector<cplx>> cols(d, std::vector<cplx>(d));
  for (auto& c : cols)
    for (auto& z : c) {
      const double re = normal(rng);
      const double im = normal(rng);
      z = cplx(re, im) / std::sqrt(2.0);
    }
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t q = 0; q < k; ++q) {
      cplx c = 0.0;
      for (std::size_t t = 0; t < d; ++t) c += std::conj(cols[q][t]) * cols[k][t];
      for (std::size_t t = 0; t < d; ++t) cols[k][t] -= c * cols[q][t];
    }
    double nrm = 0.0;
    for (const auto& z : cols[k]) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    for (auto& z : cols[k]) z /= nrm;
  }
  ComplexMatrix u(d, d);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t t = 0; t < d; ++t) u(t, k) = cols[k][t];
  return u;
}

ComplexMatrix random_unitary(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return random_unitary(d, rng);
}

Superoperator random_channel(std::size_t d, std::size_t env_dim, Rng& rng) {
  if (d < 1 || env_dim < 1) throw InvalidArgument("random_channel: dimensions must be positive");
  const ComplexMatrix u = random_unitary(d * env_dim, rng);
  // Kraus K_e = (I (x) <e|) U (I (x) |0>)
  std::vector<ComplexMatrix> kraus;
  for (std::size_t e = 0; e < env_dim; ++e) {
    ComplexMatrix k(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) k(a, b) = u(a * env_dim + e, b * env_dim);
    kraus.push_back(std::move(k));
  }
  return super_from_kraus(kraus);
}

Superoperator random_channel(std::size_t d, std::size_t env_dim, std::uint64_t seed) {
  Rng rng(seed);
  return random_channel(d, env_dim, rng);
}

DensityMatrix random_density(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im);
    }
  ComplexMatrix r = g * g.adjoint();
  r *= cplx(1.0 / r.trace().real());
  // Exact Hermitian symmetrization.
  ComplexMatrix h = (r + r.adjoint()) * cplx(0.5);
  return DensityMatrix(std::move(h));
}

MeasurementBasis random_basis(std::size_t d, Rng& rng) { return MeasurementBasis(random_unitary(d, rng)); }

ComplexMatrix basis_permuting_unitary(const MeasurementBasis& from, const MeasurementBasis& to,
                                      const std::vector<std::size_t>& perm,
                                      const std::vector<double>& phases) {
  const std::size_t d = from.dim();
  if (to.dim() != d || perm.size() != d || phases.size() != d)
    throw InvalidArgument("basis_permuting_unitary: size mismatch");
  std::vector<bool> seen(d, false);
  ComplexMatrix u(d, d);
  for (std::size_t x = 0; x < d; ++x) {
    if (perm[x] >= d || seen[perm[x]]) throw InvalidArgument("basis_permuting_unitary: not a permutation");
    seen[perm[x]] = true;
    u += ComplexMatrix::outer(to.ket(perm[x]), from.ket(x)) * std::polar(1.0, phases[x]);
  }
  return u;
}

}  // namespace qfluct
