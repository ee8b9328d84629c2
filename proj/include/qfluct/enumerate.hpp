#pragma once

#include <cstddef>
#include <vector>

namespace qfluct {

using OutcomePath = std::vector<std::size_t>;

// Calls fn(path) for every path in [0, radix)^length, last index fastest.
template <typename Fn>
void for_each_path(std::size_t radix, std::size_t length, Fn&& fn) {
  OutcomePath path(length, 0);
  while (true) {
    fn(static_cast<const OutcomePath&>(path));
    std::size_t pos = length;
    while (pos > 0) {
      --pos;
      if (++path[pos] < radix) break;
      path[pos] = 0;
      if (pos == 0) return;
    }
    if (length == 0) return;
  }
}

inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) r *= base;
  return r;
}

// Relative pointwise violation |a - b| / max(|a|, |b|); 0 when both vanish.
template <typename T>
double relative_violation(const T& a, const T& b) {
  using std::abs;
  const double scale = abs(a) > abs(b) ? abs(a) : abs(b);
  return scale == 0.0 ? 0.0 : abs(a - b) / scale;
}

}  // namespace qfluct
