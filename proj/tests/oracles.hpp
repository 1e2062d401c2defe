#pragma once

// Slow reference implementations used to cross-check the library.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mcfs/signature.hpp"
#include "mcfs/types.hpp"

namespace mcfs::oracle {

/// Direct count of delta_i x_i x_{i-1} < 0 with delta = (-1, +1, ..., +1).
inline int count_products(const Signs& s) {
  const int n = static_cast<int>(s.size());
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const int prev = s[static_cast<std::size_t>((i + n - 1) % n)];
    const int delta = i == 0 ? -1 : 1;
    if (delta * s[static_cast<std::size_t>(i)] * prev < 0) ++count;
  }
  return count;
}

/// Envelopes by enumerating all 2^z sign assignments of the zero entries.
inline signature::LyapunovBounds enumerate_bounds(const Signs& s) {
  std::vector<std::size_t> zeros;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0) zeros.push_back(i);
  }
  int lo = 1 << 30;
  int hi = -1;
  Signs t = s;
  const std::uint64_t total = std::uint64_t{1} << zeros.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (std::size_t k = 0; k < zeros.size(); ++k) t[zeros[k]] = (mask >> k) & 1 ? 1 : -1;
    const int v = count_products(t);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi, lo == hi};
}

}  // namespace mcfs::oracle
