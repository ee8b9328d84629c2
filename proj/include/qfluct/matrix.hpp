#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace qfluct {

using cplx = std::complex<double>;

// Dense row-major complex matrix: entry (i, j) lives at data()[i * cols() + j].
// A default-constructed matrix is empty (0 x 0) and only useful as a placeholder;
// every other constructor enforces rows, cols >= 1 and finite entries.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t d);
  static ComplexMatrix diagonal(const std::vector<double>& values);
  // |a><b| for column vectors a, b.
  static ComplexMatrix outer(const std::vector<cplx>& a, const std::vector<cplx>& b);
  // Matrix unit |i><j| in dimension d.
  static ComplexMatrix unit(std::size_t d, std::size_t i, std::size_t j);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  const std::vector<cplx>& entries() const { return data_; }

  std::vector<cplx> column(std::size_t j) const;
  std::vector<cplx> row(std::size_t i) const;

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conjugate() const;

  cplx trace() const;
  double frobenius_norm() const;
  // ||A - A^dagger||_F
  double hermiticity_residual() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(cplx s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(ComplexMatrix a, cplx s);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
std::vector<cplx> operator*(const ComplexMatrix& a, const std::vector<cplx>& v);

// sum_i conj(a_i) b_i
cplx dotc(const std::vector<cplx>& a, const std::vector<cplx>& b);
// <a|M|b>
cplx sandwich(const std::vector<cplx>& a, const ComplexMatrix& m, const std::vector<cplx>& b);
// Tr(A^dagger B)
cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);
double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b);
// Largest absolute off-diagonal entry.
double max_offdiag(const ComplexMatrix& a);

// Hermitian, PSD (min eigenvalue >= -1e-10) and unit trace (1e-10).
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m);
  // Skips validation; the caller guarantees the invariants (used for
  // states produced by channels already checked upstream).
  static DensityMatrix trusted(ComplexMatrix m);
  static DensityMatrix maximally_mixed(std::size_t d);
  static DensityMatrix pure(const std::vector<cplx>& ket);

  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  operator const ComplexMatrix&() const { return m_; }

 private:
  struct Trusted {};
  DensityMatrix(ComplexMatrix m, Trusted) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

}  // namespace qfluct
