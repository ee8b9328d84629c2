#include "qfluct/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qfluct/errors.hpp"

namespace qfluct {
namespace {

using EMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kClusterTol = 1e-12;

// Canonical orthonormal basis of span(block columns); see herm_eig.
std::vector<std::vector<cplx>> canonical_block(const std::vector<std::vector<cplx>>& block,
                                               std::size_t d) {
  const std::size_t r = block.size();
  std::vector<std::vector<cplx>> chosen;
  std::vector<int> leading;
  std::vector<bool> used(d, false);
  while (chosen.size() < r) {
    std::size_t best = d;
    double best_norm = -1.0;
    std::vector<cplx> best_vec;
    for (std::size_t k = 0; k < d; ++k) {
      if (used[k]) continue;
      // P e_k with P the block projector, minus components on chosen vectors.
      std::vector<cplx> v(d, 0.0);
      for (const auto& b : block) {
        const cplx c = std::conj(b[k]);
        for (std::size_t t = 0; t < d; ++t) v[t] += b[t] * c;
      }
      for (const auto& q : chosen) {
        cplx c = 0.0;
        for (std::size_t t = 0; t < d; ++t) c += std::conj(q[t]) * v[t];
        for (std::size_t t = 0; t < d; ++t) v[t] -= c * q[t];
      }
      double nrm = 0.0;
      for (const auto& z : v) nrm += std::norm(z);
      nrm = std::sqrt(nrm);
      if (nrm > best_norm + 1e-9) {
        best_norm = nrm;
        best = k;
        best_vec = std::move(v);
      }
    }
    used[best] = true;
    for (auto& z : best_vec) z /= best_norm;
    std::size_t lead = 0;
    while (lead < d && std::abs(best_vec[lead]) <= 1e-10) ++lead;
    const cplx phase = std::abs(best_vec[lead]) / best_vec[lead];
    for (auto& z : best_vec) z *= phase;
    chosen.push_back(std::move(best_vec));
    leading.push_back(static_cast<int>(lead));
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return leading[a] < leading[b]; });
  std::vector<std::vector<cplx>> out;
  out.reserve(r);
  for (auto k : order) out.push_back(chosen[k]);
  return out;
}

}  // namespace

HermitianEigensystem herm_eig(const ComplexMatrix& a) {
  if (a.empty() || !a.square()) throw InvalidArgument("herm_eig: matrix must be square");
  const double scale = std::max(1.0, a.frobenius_norm());
  if (a.hermiticity_residual() > 1e-10 * scale)
    throw InvalidArgument("herm_eig: matrix is not Hermitian (residual " +
                          std::to_string(a.hermiticity_residual()) + ")");
  const std::size_t d = a.rows();
  EMat m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  Eigen::SelfAdjointEigenSolver<EMat> solver(m);
  if (solver.info() != Eigen::Success) throw ConsistencyError("herm_eig: eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();

  double lam_max = 0.0;
  for (std::size_t k = 0; k < d; ++k) lam_max = std::max(lam_max, std::abs(ev(k)));
  const double tol = kClusterTol * std::max(1.0, lam_max);

  HermitianEigensystem out{std::vector<double>(d), ComplexMatrix(d, d)};
  std::size_t start = 0;
  while (start < d) {
    std::size_t stop = start + 1;
    while (stop < d && ev(stop) - ev(stop - 1) <= tol) ++stop;
    std::vector<std::vector<cplx>> block;
    for (std::size_t k = start; k < stop; ++k) {
      std::vector<cplx> v(d);
      for (std::size_t t = 0; t < d; ++t) v[t] = vecs(t, k);
      block.push_back(std::move(v));
    }
    if (stop - start > 1) {
      block = canonical_block(block, d);
    } else {
      auto& v = block.front();
      std::size_t lead = 0;
      while (lead < d && std::abs(v[lead]) <= 1e-10) ++lead;
      const cplx phase = std::abs(v[lead]) / v[lead];
      for (auto& z : v) z *= phase;
    }
    for (std::size_t k = start; k < stop; ++k) {
      const auto& v = block[k - start];
      for (std::size_t t = 0; t < d; ++t) out.vectors(t, k) = v[t];
      // Rayleigh quotient keeps values consistent with the rotated vectors.
      cplx q = 0.0;
      for (std::size_t s = 0; s < d; ++s) {
        cplx row = 0.0;
        for (std::size_t t = 0; t < d; ++t) row += m(s, t) * v[t];
        q += std::conj(v[s]) * row;
      }
      out.values[k] = q.real();
      if (k > 0 && out.values[k] < out.values[k - 1]) out.values[k] = out.values[k - 1];
    }
    start = stop;
  }
  return out;
}

ComplexMatrix mat_power(const ComplexMatrix& a, double alpha) {
  const auto eig = herm_eig(a);
  const double lam_max = std::max(0.0, eig.values.back());
  if (eig.values.front() < -1e-12 * std::max(1.0, lam_max))
    throw InvalidArgument("mat_power: matrix is not positive semidefinite (eigenvalue " +
                          std::to_string(eig.values.front()) + ")");
  const double cutoff = 1e-12 * lam_max;
  const std::size_t d = a.rows();
  ComplexMatrix scaled = eig.vectors;
  for (std::size_t k = 0; k < d; ++k) {
    const double lam = eig.values[k];
    const double p = lam <= cutoff ? 0.0 : std::pow(lam, alpha);
    for (std::size_t t = 0; t < d; ++t) scaled(t, k) *= p;
  }
  return scaled * eig.vectors.adjoint();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  ComplexMatrix out(ar * br, ac * bc);
  for (std::size_t i = 0; i < ar; ++i)
    for (std::size_t j = 0; j < ac; ++j) {
      const cplx s = a(i, j);
      if (s == cplx(0.0, 0.0)) continue;
      for (std::size_t k = 0; k < br; ++k)
        for (std::size_t l = 0; l < bc; ++l) out(i * br + k, j * bc + l) = s * b(k, l);
    }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& a, const std::vector<std::size_t>& dims,
                            std::size_t keep) {
  if (!a.square()) throw InvalidArgument("partial_trace: matrix must be square");
  if (dims.empty() || keep >= dims.size()) throw InvalidArgument("partial_trace: bad factor index");
  std::size_t total = 1;
  for (auto d : dims) {
    if (d == 0) throw InvalidArgument("partial_trace: zero factor dimension");
    total *= d;
  }
  if (total != a.rows()) throw InvalidArgument("partial_trace: factor dimensions do not match matrix");
  std::size_t before = 1, after = 1;
  for (std::size_t f = 0; f < keep; ++f) before *= dims[f];
  for (std::size_t f = keep + 1; f < dims.size(); ++f) after *= dims[f];
  const std::size_t dk = dims[keep];
  ComplexMatrix out(dk, dk);
  for (std::size_t x = 0; x < dk; ++x)
    for (std::size_t y = 0; y < dk; ++y) {
      cplx s = 0.0;
      for (std::size_t p = 0; p < before; ++p)
        for (std::size_t q = 0; q < after; ++q)
          s += a((p * dk + x) * after + q, (p * dk + y) * after + q);
      out(x, y) = s;
    }
  return out;
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidArgument("relative_entropy: dimension mismatch");
  const auto er = herm_eig(rho.matrix());
  const auto es = herm_eig(sigma.matrix());
  const std::size_t d = rho.dim();
  const double s_cut = 1e-12 * std::max(0.0, es.values.back());
  double plogp = 0.0;
  for (double p : er.values)
    if (p > 0.0) plogp += p * std::log(p);
  double cross = 0.0;
  double outside = 0.0;
  for (std::size_t b = 0; b < d; ++b) {
    const auto vb = es.vectors.column(b);
    const double w = sandwich(vb, rho.matrix(), vb).real();
    if (es.values[b] <= s_cut) {
      outside += std::max(0.0, w);
    } else {
      cross += w * std::log(es.values[b]);
    }
  }
  if (outside > 1e-10) return std::numeric_limits<double>::infinity();
  return plogp - cross;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  double s = 0.0;
  for (double p : herm_eig(rho.matrix()).values)
    if (p > 0.0) s -= p * std::log(p);
  return s;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  const auto eig = herm_eig(a - b);
  double s = 0.0;
  for (double v : eig.values) s += std::abs(v);
  return 0.5 * s;
}

}  // namespace qfluct
