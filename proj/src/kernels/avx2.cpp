#include <immintrin.h>

#include "qfluct/kernels.hpp"

namespace qfluct::kernels {
namespace {

// Two complex doubles per register: [re0 im0 re1 im1].

void gemm_avx2(const cplx* a, const cplx* b, cplx* c, std::size_t m,
               std::size_t k, std::size_t n) {
  const double* bd = reinterpret_cast<const double*>(b);
  double* cd = reinterpret_cast<double*>(c);
  const std::size_t n2 = n & ~std::size_t{1};
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = cd + 2 * i * n;
    for (std::size_t j = 0; j < 2 * n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double ar = a[i * k + p].real();
      const double ai = a[i * k + p].imag();
      if (ar == 0.0 && ai == 0.0) continue;
      const __m256d vr = _mm256_set1_pd(ar);
      const __m256d vi = _mm256_set1_pd(ai);
      const double* brow = bd + 2 * p * n;
      std::size_t j = 0;
      for (; j < n2; j += 2) {
        const __m256d bv = _mm256_loadu_pd(brow + 2 * j);
        const __m256d bs = _mm256_permute_pd(bv, 0x5);
        // (ar*br - ai*bi, ar*bi + ai*br)
        const __m256d prod = _mm256_fmaddsub_pd(vr, bv, _mm256_mul_pd(vi, bs));
        _mm256_storeu_pd(crow + 2 * j,
                         _mm256_add_pd(_mm256_loadu_pd(crow + 2 * j), prod));
      }
      for (; j < n; ++j) {
        const double br = brow[2 * j];
        const double bi = brow[2 * j + 1];
        crow[2 * j] += ar * br - ai * bi;
        crow[2 * j + 1] += ar * bi + ai * br;
      }
    }
  }
}

cplx dotc_avx2(const cplx* a, const cplx* b, std::size_t n) {
  const double* ad = reinterpret_cast<const double*>(a);
  const double* bd = reinterpret_cast<const double*>(b);
  __m256d same = _mm256_setzero_pd();   // [ar*br, ai*bi, ...]
  __m256d cross = _mm256_setzero_pd();  // [ar*bi, ai*br, ...]
  const std::size_t n2 = n & ~std::size_t{1};
  std::size_t i = 0;
  for (; i < n2; i += 2) {
    const __m256d av = _mm256_loadu_pd(ad + 2 * i);
    const __m256d bv = _mm256_loadu_pd(bd + 2 * i);
    same = _mm256_fmadd_pd(av, bv, same);
    cross = _mm256_fmadd_pd(av, _mm256_permute_pd(bv, 0x5), cross);
  }
  alignas(32) double s[4];
  alignas(32) double x[4];
  _mm256_store_pd(s, same);
  _mm256_store_pd(x, cross);
  double re = (s[0] + s[1]) + (s[2] + s[3]);
  double im = (x[0] - x[1]) + (x[2] - x[3]);
  for (; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{"avx2", &gemm_avx2, &dotc_avx2};
  return table;
}

}  // namespace qfluct::kernels
