#include <cstdlib>
#include <string>

#include "qfluct/errors.hpp"
#include "qfluct/kernels.hpp"

namespace qfluct::kernels {

#ifdef QFLUCT_WITH_AVX2
const KernelTable& avx2_kernels();
#endif

const KernelTable* avx2_table() {
#ifdef QFLUCT_WITH_AVX2
  static const bool ok = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return ok ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* lookup(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  return nullptr;
}

const KernelTable* initial() {
  if (const char* env = std::getenv("QFLUCT_KERNELS"); env && *env) {
    if (const KernelTable* t = lookup(env)) return t;
    throw InvalidArgument(std::string("QFLUCT_KERNELS: unknown or unavailable kernel set '") +
                          env + "'");
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &scalar_table();
}

const KernelTable*& current() {
  static const KernelTable* table = initial();
  return table;
}

}  // namespace

const KernelTable& active() { return *current(); }

void select(std::string_view name) {
  const KernelTable* t = lookup(name);
  if (!t) throw InvalidArgument("kernel set '" + std::string(name) + "' is unknown or unavailable");
  current() = t;
}

}  // namespace qfluct::kernels
