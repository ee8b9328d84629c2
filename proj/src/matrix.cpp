#include "qfluct/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfluct/errors.hpp"
#include "qfluct/kernels.hpp"
#include "qfluct/linalg.hpp"

namespace qfluct {

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx(0.0, 0.0)) {
  if (rows == 0 || cols == 0) throw InvalidArgument("ComplexMatrix: dimensions must be >= 1");
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) throw InvalidArgument("ComplexMatrix: dimensions must be >= 1");
  if (data_.size() != rows * cols)
    throw InvalidArgument("ComplexMatrix: expected " + std::to_string(rows * cols) +
                          " entries, got " + std::to_string(data_.size()));
  if (!all_finite()) throw InvalidArgument("ComplexMatrix: non-finite entry");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  if (rows_ == 0 || cols_ == 0) throw InvalidArgument("ComplexMatrix: dimensions must be >= 1");
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw InvalidArgument("ComplexMatrix: non-finite entry");
}

ComplexMatrix ComplexMatrix::identity(std::size_t d) {
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<double>& values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::outer(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  ComplexMatrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * std::conj(b[j]);
  return m;
}

ComplexMatrix ComplexMatrix::unit(std::size_t d, std::size_t i, std::size_t j) {
  if (i >= d || j >= d) throw InvalidArgument("matrix unit index out of range");
  ComplexMatrix m(d, d);
  m(i, j) = 1.0;
  return m;
}

std::vector<cplx> ComplexMatrix::column(std::size_t j) const {
  std::vector<cplx> v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

std::vector<cplx> ComplexMatrix::row(std::size_t i) const {
  return {data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
  return m;
}

ComplexMatrix ComplexMatrix::conjugate() const {
  ComplexMatrix m = *this;
  for (auto& z : m.data_) z = std::conj(z);
  return m;
}

cplx ComplexMatrix::trace() const {
  if (!square()) throw InvalidArgument("trace of a non-square matrix");
  cplx t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

double ComplexMatrix::hermiticity_residual() const {
  if (!square()) throw InvalidArgument("hermiticity of a non-square matrix");
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s += std::norm((*this)(i, j) - std::conj((*this)(j, i)));
  return std::sqrt(s);
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidArgument("matrix sum: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw InvalidArgument("matrix difference: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows())
    throw InvalidArgument("matrix product: " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  ComplexMatrix c(a.rows(), b.cols());
  kernels::active().gemm(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

std::vector<cplx> operator*(const ComplexMatrix& a, const std::vector<cplx>& v) {
  if (a.cols() != v.size()) throw InvalidArgument("matrix-vector product: shape mismatch");
  std::vector<cplx> out(a.rows());
  kernels::active().gemm(a.data(), v.data(), out.data(), a.rows(), a.cols(), 1);
  return out;
}

cplx dotc(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  if (a.size() != b.size()) throw InvalidArgument("dotc: length mismatch");
  return kernels::active().dotc(a.data(), b.data(), a.size());
}

cplx sandwich(const std::vector<cplx>& a, const ComplexMatrix& m, const std::vector<cplx>& b) {
  return dotc(a, m * b);
}

cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("Hilbert-Schmidt inner product: shape mismatch");
  return kernels::active().dotc(a.data(), b.data(), a.size());
}

double frobenius_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).frobenius_norm();
}

double max_offdiag(const ComplexMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) m = std::max(m, std::abs(a(i, j)));
  return m;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  if (m_.empty() || !m_.square()) throw InvalidArgument("DensityMatrix: matrix must be square");
  if (m_.hermiticity_residual() > 1e-10 * std::max(1.0, m_.frobenius_norm()))
    throw InvalidArgument("DensityMatrix: matrix is not Hermitian");
  const cplx tr = m_.trace();
  if (std::abs(tr - 1.0) > 1e-10)
    throw InvalidArgument("DensityMatrix: trace " + std::to_string(tr.real()) + " is not 1");
  const auto eig = herm_eig(m_);
  if (eig.values.front() < -1e-10)
    throw InvalidArgument("DensityMatrix: negative eigenvalue " + std::to_string(eig.values.front()));
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix m) { return DensityMatrix(std::move(m), Trusted{}); }

DensityMatrix DensityMatrix::maximally_mixed(std::size_t d) {
  return trusted(ComplexMatrix::identity(d) * cplx(1.0 / static_cast<double>(d)));
}

DensityMatrix DensityMatrix::pure(const std::vector<cplx>& ket) {
  double n = 0.0;
  for (const auto& z : ket) n += std::norm(z);
  if (std::abs(n - 1.0) > 1e-10) throw InvalidArgument("DensityMatrix::pure: ket is not normalized");
  return trusted(ComplexMatrix::outer(ket, ket));
}

}  // namespace qfluct
