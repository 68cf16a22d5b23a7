#include <cmath>

#include "kernel_math.hpp"
#include "stochavg/simd/kernels.hpp"

namespace stochavg::simd {

namespace {

void philox_blocks_scalar(PhiloxKey key, PhiloxCounterTail tail, std::uint32_t first, std::size_t count,
                          std::uint32_t* out) {
  for (std::size_t b = 0; b < count; ++b) {
    std::uint32_t ctr[4] = {first + static_cast<std::uint32_t>(b), tail.c1, tail.c2, tail.c3};
    detail::philox4x32_10(ctr, key.k0, key.k1);
    for (int w = 0; w < 4; ++w) out[4 * b + w] = ctr[w];
  }
}

void gaussian_pairs_scalar(const std::uint32_t* words, std::size_t pairs, double* out) {
  for (std::size_t p = 0; p < pairs; ++p) detail::gaussian_pair(words + 4 * p, out + 2 * p);
}

void relax_rows_scalar(const RelaxArgs& a) {
  const std::size_t n = a.n;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = a.x[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t ch = i * n + j;
      const double w = a.adjacency[ch];
      if (w == 0.0) continue;
      const double d = a.x[j] - xi;
      const double f = a.sigma[ch] * std::abs(d) + a.b[ch];
      acc += w * (d + f * a.xi[ch]);
    }
    a.x_next[i] = xi + a.gain * acc;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &philox_blocks_scalar, &gaussian_pairs_scalar, &relax_rows_scalar};
  return table;
}

}  // namespace stochavg::simd
