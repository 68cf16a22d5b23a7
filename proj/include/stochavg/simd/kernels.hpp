#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Hot inner loops of the simulator. Each entry has a scalar reference and,
// where the target supports it, an AVX2 variant chosen once at runtime.
//
//  - philox_blocks / gaussian_pairs: the AVX2 variants are bit-identical to
//    the scalar reference (same operation sequence, no FMA contraction).
//  - relax_rows: the AVX2 variant reduces over neighbours in a different
//    order, so results agree to a few ulps rather than bitwise.

namespace stochavg::simd {

struct PhiloxKey {
  std::uint32_t k0;
  std::uint32_t k1;
};

/// Counter words (c1, c2, c3) shared by a run of consecutive blocks; word c0
/// is the block index.
struct PhiloxCounterTail {
  std::uint32_t c1;
  std::uint32_t c2;
  std::uint32_t c3;
};

/// Inputs to one synchronous protocol step with affine intensities
/// f_ji(d) = sigma_ji |d| + b_ji. Channel (j -> i) lives at index i*n + j in
/// sigma, b and xi; adjacency is row-major.
struct RelaxArgs {
  std::size_t n;
  const double* x;
  const double* adjacency;
  const double* sigma;
  const double* b;
  const double* xi;
  double gain;
  double* x_next;
};

struct KernelTable {
  std::string_view name;
  /// Writes 4*count words: block b (0-based) at out[4b..4b+3] is
  /// Philox4x32-10 of counter (first + b, c1, c2, c3).
  void (*philox_blocks)(PhiloxKey key, PhiloxCounterTail tail, std::uint32_t first, std::size_t count,
                        std::uint32_t* out);
  /// Box-Muller on 4 words per pair; writes 2*pairs standard normals.
  void (*gaussian_pairs)(const std::uint32_t* words, std::size_t pairs, double* out);
  void (*relax_rows)(const RelaxArgs& args);
};

const KernelTable& scalar_kernels();

/// nullptr when AVX2 was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

/// Best available table; STOCHAVG_SIMD=scalar forces the reference path.
const KernelTable& active_kernels();

}  // namespace stochavg::simd
