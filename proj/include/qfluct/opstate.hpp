#pragma once

#include <cstddef>
#include <vector>

#include "qfluct/matrix.hpp"

namespace qfluct {

// Operator O on C^d as a vector of d^2 components; component i*d + j is the
// coefficient of the matrix unit |i><j|.
class OperatorVector {
 public:
  OperatorVector(std::size_t dim, std::vector<cplx> components);

  std::size_t dim() const { return dim_; }
  const std::vector<cplx>& components() const { return comps_; }
  const cplx& operator[](std::size_t k) const { return comps_[k]; }

 private:
  std::size_t dim_;
  std::vector<cplx> comps_;
};

OperatorVector vectorize(const ComplexMatrix& o);
ComplexMatrix devectorize(const OperatorVector& v);
// (A|B) = Tr(A^dagger B)
cplx inner(const OperatorVector& a, const OperatorVector& b);

enum class Tri { unchecked, yes, no };

// Linear map from operators on C^in_dim to operators on C^out_dim, stored as
// the out_dim^2 x in_dim^2 matrix with entry (k*out+l, i*in+j) = [S(|i><j|)]_kl.
class Superoperator {
 public:
  Superoperator(std::size_t in_dim, std::size_t out_dim, ComplexMatrix matrix,
                Tri tp = Tri::unchecked, Tri cp = Tri::unchecked);

  static Superoperator identity(std::size_t d);

  std::size_t in_dim() const { return in_; }
  std::size_t out_dim() const { return out_; }
  const ComplexMatrix& matrix() const { return m_; }
  Tri tp_flag() const { return tp_; }
  Tri cp_flag() const { return cp_; }

  // (Pi_kl | S | Pi_ij)
  cplx element(std::size_t k, std::size_t l, std::size_t i, std::size_t j) const {
    return m_(k * out_ + l, i * in_ + j);
  }

  // Copy with both flags evaluated.
  Superoperator checked() const;

 private:
  std::size_t in_;
  std::size_t out_;
  ComplexMatrix m_;
  Tri tp_;
  Tri cp_;
};

Superoperator super_from_kraus(const std::vector<ComplexMatrix>& kraus);
Superoperator adjoint_super(const Superoperator& s);
// a after b
Superoperator compose(const Superoperator& a, const Superoperator& b);
ComplexMatrix apply(const Superoperator& s, const ComplexMatrix& x);

// Choi(S) = sum_ij S(|i><j|) (x) |i><j|, output factor first.
ComplexMatrix choi_of(const Superoperator& s);
double choi_min_eigenvalue(const Superoperator& s);
// || Tr_out Choi(S) - I ||_F
double tp_residual(const Superoperator& s);
bool is_cp(const Superoperator& s, double tol = 1e-10);
bool is_tp(const Superoperator& s, double tol = 1e-10);
// Kraus operators from the Choi spectrum (eigenvalues below 1e-14 dropped).
std::vector<ComplexMatrix> kraus_from_choi(const ComplexMatrix& choi, std::size_t in_dim,
                                           std::size_t out_dim);

}  // namespace qfluct
