#include "qfluct/opstate.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qfluct/errors.hpp"
#include "qfluct/linalg.hpp"

namespace qfluct {

OperatorVector::OperatorVector(std::size_t dim, std::vector<cplx> components)
    : dim_(dim), comps_(std::move(components)) {
  if (dim == 0 || comps_.size() != dim * dim)
    throw InvalidArgument("OperatorVector: expected dim^2 components");
}

OperatorVector vectorize(const ComplexMatrix& o) {
  if (o.empty() || !o.square()) throw InvalidArgument("vectorize: operator must be square");
  return OperatorVector(o.rows(), o.entries());
}

ComplexMatrix devectorize(const OperatorVector& v) {
  return ComplexMatrix(v.dim(), v.dim(), v.components());
}

cplx inner(const OperatorVector& a, const OperatorVector& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("inner: dimension mismatch");
  return dotc(a.components(), b.components());
}

Superoperator::Superoperator(std::size_t in_dim, std::size_t out_dim, ComplexMatrix matrix, Tri tp,
                             Tri cp)
    : in_(in_dim), out_(out_dim), m_(std::move(matrix)), tp_(tp), cp_(cp) {
  if (in_ == 0 || out_ == 0) throw InvalidArgument("Superoperator: zero dimension");
  if (m_.rows() != out_ * out_ || m_.cols() != in_ * in_)
    throw InvalidArgument("Superoperator: matrix shape does not match dimensions");
}

Superoperator Superoperator::identity(std::size_t d) {
  return Superoperator(d, d, ComplexMatrix::identity(d * d), Tri::yes, Tri::yes);
}

Superoperator Superoperator::checked() const {
  return Superoperator(in_, out_, m_, is_tp(*this) ? Tri::yes : Tri::no,
                       is_cp(*this) ? Tri::yes : Tri::no);
}

Superoperator super_from_kraus(const std::vector<ComplexMatrix>& kraus) {
  if (kraus.empty()) throw InvalidArgument("super_from_kraus: empty Kraus list");
  const std::size_t out = kraus.front().rows();
  const std::size_t in = kraus.front().cols();
  ComplexMatrix m(out * out, in * in);
  ComplexMatrix kdk(in, in);
  for (const auto& k : kraus) {
    if (k.rows() != out || k.cols() != in)
      throw InvalidArgument("super_from_kraus: Kraus operators have different shapes");
    m += kron(k, k.conjugate());
    kdk += k.adjoint() * k;
  }
  const bool tp = frobenius_distance(kdk, ComplexMatrix::identity(in)) <= 1e-10;
  return Superoperator(in, out, std::move(m), tp ? Tri::yes : Tri::no, Tri::yes);
}

Superoperator adjoint_super(const Superoperator& s) {
  // TP of S is unitality of S^dagger, so the TP flag does not carry over.
  return Superoperator(s.out_dim(), s.in_dim(), s.matrix().adjoint(), Tri::unchecked, s.cp_flag());
}

Superoperator compose(const Superoperator& a, const Superoperator& b) {
  if (a.in_dim() != b.out_dim()) throw InvalidArgument("compose: dimension mismatch");
  const auto both = [](Tri x, Tri y) {
    return (x == Tri::yes && y == Tri::yes) ? Tri::yes : Tri::unchecked;
  };
  return Superoperator(b.in_dim(), a.out_dim(), a.matrix() * b.matrix(),
                       both(a.tp_flag(), b.tp_flag()), both(a.cp_flag(), b.cp_flag()));
}

ComplexMatrix apply(const Superoperator& s, const ComplexMatrix& x) {
  if (!x.square() || x.rows() != s.in_dim()) throw InvalidArgument("apply: operator dimension mismatch");
  return ComplexMatrix(s.out_dim(), s.out_dim(), s.matrix() * x.entries());
}

ComplexMatrix choi_of(const Superoperator& s) {
  const std::size_t d = s.in_dim(), dp = s.out_dim();
  ComplexMatrix c(dp * d, dp * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < dp; ++k)
        for (std::size_t l = 0; l < dp; ++l) c(k * d + i, l * d + j) = s.element(k, l, i, j);
  return c;
}

double choi_min_eigenvalue(const Superoperator& s) {
  const ComplexMatrix c = choi_of(s);
  if (c.hermiticity_residual() > 1e-9 * std::max(1.0, c.frobenius_norm()))
    return -std::numeric_limits<double>::infinity();
  return herm_eig(c).values.front();
}

double tp_residual(const Superoperator& s) {
  const ComplexMatrix reduced = partial_trace(choi_of(s), {s.out_dim(), s.in_dim()}, 1);
  return frobenius_distance(reduced, ComplexMatrix::identity(s.in_dim()));
}

bool is_cp(const Superoperator& s, double tol) {
  if (s.cp_flag() != Tri::unchecked) return s.cp_flag() == Tri::yes;
  return choi_min_eigenvalue(s) >= -tol;
}

bool is_tp(const Superoperator& s, double tol) {
  if (s.tp_flag() != Tri::unchecked) return s.tp_flag() == Tri::yes;
  return tp_residual(s) <= tol;
}

std::vector<ComplexMatrix> kraus_from_choi(const ComplexMatrix& choi, std::size_t in_dim,
                                           std::size_t out_dim) {
  if (choi.rows() != in_dim * out_dim || !choi.square())
    throw InvalidArgument("kraus_from_choi: Choi matrix shape does not match dimensions");
  const auto eig = herm_eig(choi);
  if (eig.values.front() < -1e-10)
    throw InvalidArgument("kraus_from_choi: Choi matrix is not positive semidefinite");
  std::vector<ComplexMatrix> out;
  for (std::size_t a = 0; a < eig.values.size(); ++a) {
    if (eig.values[a] <= 1e-14) continue;
    const double s = std::sqrt(eig.values[a]);
    ComplexMatrix k(out_dim, in_dim);
    for (std::size_t r = 0; r < out_dim; ++r)
      for (std::size_t c = 0; c < in_dim; ++c) k(r, c) = s * eig.vectors(r * in_dim + c, a);
    out.push_back(std::move(k));
  }
  if (out.empty()) throw InvalidArgument("kraus_from_choi: zero map");
  return out;
}

}  // namespace qfluct
