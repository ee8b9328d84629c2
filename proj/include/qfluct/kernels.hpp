#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

namespace qfluct::kernels {

using cplx = std::complex<double>;

// c[m x n] = a[m x k] * b[k x n], all row-major and contiguous. c must not alias.
using GemmFn = void (*)(const cplx* a, const cplx* b, cplx* c, std::size_t m,
                        std::size_t k, std::size_t n);
// sum_i conj(a[i]) * b[i]
using DotcFn = cplx (*)(const cplx* a, const cplx* b, std::size_t n);

struct KernelTable {
  const char* name;
  GemmFn gemm;
  DotcFn dotc;
};

const KernelTable& scalar_table();
// nullptr when the build or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

// Table used by ComplexMatrix. Chosen once from CPU features; the
// QFLUCT_KERNELS environment variable (scalar|avx2) overrides.
const KernelTable& active();

// Throws InvalidArgument for unknown or unavailable names. Not thread-safe
// with respect to concurrent matrix arithmetic; call before spawning work.
void select(std::string_view name);

}  // namespace qfluct::kernels
