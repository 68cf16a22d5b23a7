// Compiled with -mavx2 only; reached through the dispatch table after a
// runtime CPU check.

#include <immintrin.h>

#include <cmath>

#include "kernel_math.hpp"
#include "stochavg/simd/kernels.hpp"

namespace stochavg::simd {

namespace {

// High and low 32-bit halves of the lane-wise 32x32 product with a constant.
inline void mulhilo(__m256i a, __m256i m, __m256i& hi, __m256i& lo) {
  lo = _mm256_mullo_epi32(a, m);
  const __m256i even = _mm256_mul_epu32(a, m);
  const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

void philox_blocks_avx2(PhiloxKey key, PhiloxCounterTail tail, std::uint32_t first, std::size_t count,
                        std::uint32_t* out) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM1));
  const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  alignas(32) std::uint32_t soa[4][8];

  std::size_t b = 0;
  for (; b + 8 <= count; b += 8) {
    __m256i c0 = _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(first + static_cast<std::uint32_t>(b))), lane);
    __m256i c1 = _mm256_set1_epi32(static_cast<int>(tail.c1));
    __m256i c2 = _mm256_set1_epi32(static_cast<int>(tail.c2));
    __m256i c3 = _mm256_set1_epi32(static_cast<int>(tail.c3));
    std::uint32_t k0 = key.k0, k1 = key.k1;
    for (int r = 0; r < detail::kPhiloxRounds; ++r) {
      if (r > 0) {
        k0 += detail::kPhiloxW0;
        k1 += detail::kPhiloxW1;
      }
      __m256i hi0, lo0, hi1, lo1;
      mulhilo(c0, m0, hi0, lo0);
      mulhilo(c2, m1, hi1, lo1);
      const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), _mm256_set1_epi32(static_cast<int>(k0)));
      const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), _mm256_set1_epi32(static_cast<int>(k1)));
      c0 = n0;
      c1 = lo1;
      c2 = n2;
      c3 = lo0;
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(soa[0]), c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(soa[1]), c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(soa[2]), c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(soa[3]), c3);
    std::uint32_t* dst = out + 4 * b;
    for (int l = 0; l < 8; ++l)
      for (int w = 0; w < 4; ++w) dst[4 * l + w] = soa[w][l];
  }
  if (b < count) {
    scalar_kernels().philox_blocks(key, tail, first + static_cast<std::uint32_t>(b), count - b, out + 4 * b);
  }
}

inline __m256d unit_from_bits(__m256i w) {
  const __m256i bits = _mm256_or_si256(_mm256_set1_epi64x(static_cast<long long>(detail::kOneBits)),
                                       _mm256_srli_epi64(w, 12));
  return _mm256_sub_pd(_mm256_castsi256_pd(bits), _mm256_set1_pd(1.0));
}

inline __m256d poly(__m256d x, const double* c, int count, __m256d init) {
  __m256d p = init;
  for (int k = 0; k < count; ++k) p = _mm256_add_pd(_mm256_mul_pd(p, x), _mm256_set1_pd(c[k]));
  return p;
}

inline __m256d log_unit(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  // exponent field as an exact double via the 2^52 magic constant
  const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000ll);
  const __m256d raw_e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(_mm256_srli_epi64(bits, 52), magic_bits)),
                                      _mm256_set1_pd(4503599627370496.0));
  __m256d e = _mm256_sub_pd(raw_e, _mm256_set1_pd(1022.0));
  const __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(static_cast<long long>(detail::kMantissaMask))),
                      _mm256_set1_epi64x(static_cast<long long>(detail::kHalfBits))));
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(detail::kSqrtHalf), _CMP_LT_OQ);
  const __m256d one = _mm256_set1_pd(1.0);
  e = _mm256_blendv_pd(e, _mm256_sub_pd(e, one), small);
  const __m256d t = _mm256_blendv_pd(_mm256_sub_pd(m, one), _mm256_sub_pd(_mm256_add_pd(m, m), one), small);
  const __m256d z = _mm256_mul_pd(t, t);
  const __m256d p = poly(t, detail::kLogP + 1, 5, _mm256_set1_pd(detail::kLogP[0]));
  const __m256d q = poly(t, detail::kLogQ + 1, 4, _mm256_add_pd(t, _mm256_set1_pd(detail::kLogQ[0])));
  __m256d y = _mm256_mul_pd(t, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_sub_pd(y, _mm256_mul_pd(e, _mm256_set1_pd(detail::kLn2Lo)));
  y = _mm256_sub_pd(y, _mm256_mul_pd(_mm256_set1_pd(0.5), z));
  __m256d r = _mm256_add_pd(t, y);
  r = _mm256_add_pd(r, _mm256_mul_pd(e, _mm256_set1_pd(detail::kLn2Hi)));
  return r;
}

inline void sincos_turn(__m256d u, __m256d& s, __m256d& c) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(u, _mm256_set1_pd(4.0)), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d x = _mm256_mul_pd(_mm256_sub_pd(u, _mm256_mul_pd(q, _mm256_set1_pd(0.25))), _mm256_set1_pd(detail::kTwoPi));
  const __m256d z = _mm256_mul_pd(x, x);
  const __m256d ps = poly(z, detail::kSinC + 1, 5, _mm256_set1_pd(detail::kSinC[0]));
  const __m256d pc = poly(z, detail::kCosC + 1, 5, _mm256_set1_pd(detail::kCosC[0]));
  const __m256d sr = _mm256_add_pd(x, _mm256_mul_pd(x, _mm256_mul_pd(z, ps)));
  const __m256d cr = _mm256_add_pd(_mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(_mm256_set1_pd(0.5), z)),
                                   _mm256_mul_pd(_mm256_mul_pd(z, z), pc));
  const __m256d q1 = _mm256_cmp_pd(q, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
  const __m256d q2 = _mm256_cmp_pd(q, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
  const __m256d q3 = _mm256_cmp_pd(q, _mm256_set1_pd(3.0), _CMP_EQ_OQ);
  const __m256d swap = _mm256_or_pd(q1, q3);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d neg_cos = _mm256_and_pd(_mm256_or_pd(q1, q2), sign);
  const __m256d neg_sin = _mm256_and_pd(_mm256_or_pd(q2, q3), sign);
  c = _mm256_xor_pd(_mm256_blendv_pd(cr, sr, swap), neg_cos);
  s = _mm256_xor_pd(_mm256_blendv_pd(sr, cr, swap), neg_sin);
}

void gaussian_pairs_avx2(const std::uint32_t* words, std::size_t pairs, double* out) {
  std::size_t p = 0;
  for (; p + 4 <= pairs; p += 4) {
    const __m256i v0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + 4 * p));
    const __m256i v1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + 4 * p + 8));
    // v0 = [A0 B0 A1 B1], v1 = [A2 B2 A3 B3] as 64-bit lanes
    const __m256i a = _mm256_permute4x64_epi64(_mm256_unpacklo_epi64(v0, v1), 0xD8);
    const __m256i b = _mm256_permute4x64_epi64(_mm256_unpackhi_epi64(v0, v1), 0xD8);
    const __m256d u1 = _mm256_add_pd(unit_from_bits(a), _mm256_set1_pd(detail::kHalfUlp));
    const __m256d u2 = unit_from_bits(b);
    const __m256d r = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), log_unit(u1)));
    __m256d s, c;
    sincos_turn(u2, s, c);
    const __m256d z0 = _mm256_mul_pd(r, c);
    const __m256d z1 = _mm256_mul_pd(r, s);
    const __m256d lo = _mm256_unpacklo_pd(z0, z1);
    const __m256d hi = _mm256_unpackhi_pd(z0, z1);
    _mm256_storeu_pd(out + 2 * p, _mm256_permute2f128_pd(lo, hi, 0x20));
    _mm256_storeu_pd(out + 2 * p + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
  }
  for (; p < pairs; ++p) detail::gaussian_pair(words + 4 * p, out + 2 * p);
}

void relax_rows_avx2(const RelaxArgs& a) {
  const std::size_t n = a.n;
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFll));
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = a.x[i];
    const __m256d vxi = _mm256_set1_pd(xi);
    const std::size_t row = i * n;
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const __m256d w = _mm256_loadu_pd(a.adjacency + row + j);
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.x + j), vxi);
      const __m256d f = _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(a.sigma + row + j), _mm256_and_pd(d, abs_mask)),
                                      _mm256_loadu_pd(a.b + row + j));
      const __m256d term = _mm256_mul_pd(w, _mm256_add_pd(d, _mm256_mul_pd(f, _mm256_loadu_pd(a.xi + row + j))));
      acc = _mm256_add_pd(acc, term);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; j < n; ++j) {
      const std::size_t ch = row + j;
      const double w = a.adjacency[ch];
      if (w == 0.0) continue;
      const double d = a.x[j] - xi;
      const double f = a.sigma[ch] * std::abs(d) + a.b[ch];
      s += w * (d + f * a.xi[ch]);
    }
    a.x_next[i] = xi + a.gain * s;
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", &philox_blocks_avx2, &gaussian_pairs_avx2, &relax_rows_avx2};
  return table;
}

}  // namespace stochavg::simd
