#pragma once

// Constants and scalar building blocks shared by every kernel variant. The
// SIMD variants replay exactly these operation sequences lane by lane.

#include <bit>
#include <cmath>
#include <cstdint>

namespace stochavg::simd::detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
inline constexpr int kPhiloxRounds = 10;

inline constexpr std::uint64_t kOneBits = 0x3FF0000000000000ull;
inline constexpr std::uint64_t kMantissaMask = 0x000FFFFFFFFFFFFFull;
inline constexpr std::uint64_t kHalfBits = 0x3FE0000000000000ull;
inline constexpr double kHalfUlp = 0x1p-53;
inline constexpr double kSqrtHalf = 0.70710678118654752440;
inline constexpr double kTwoPi = 6.283185307179586476925;

// log(1+t) rational approximation on [sqrt(1/2)-1, sqrt(2)-1] (Cephes).
inline constexpr double kLogP[6] = {1.01875663804580931796E-4, 4.97494994976747001425E-1,
                                    4.70579119878881725854E0,  1.44989225341610930846E1,
                                    1.79368678507819816313E1,  7.70838733755885391666E0};
inline constexpr double kLogQ[5] = {1.12873587189167450590E1, 4.52279145837532221105E1,
                                    8.29875266912776603211E1, 7.11544750618563894466E1,
                                    2.31251620126765340583E1};
inline constexpr double kLn2Lo = 2.121944400546905827679e-4;
inline constexpr double kLn2Hi = 0.693359375;

// sin/cos minimax polynomials on [-pi/4, pi/4] (Cephes).
inline constexpr double kSinC[6] = {1.58962301576546568060E-10, -2.50507477628578072866E-8,
                                    2.75573136213857245213E-6,  -1.98412698295895385996E-4,
                                    8.33333333332211858878E-3,  -1.66666666666666307295E-1};
inline constexpr double kCosC[6] = {-1.13585365213876817300E-11, 2.08757008419747316778E-9,
                                    -2.75573141792967388112E-7,  2.48015872888517045348E-5,
                                    -1.38888888888730564116E-3,  4.16666666666665929218E-2};

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
  const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
  const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  const std::uint32_t c1 = ctr[1], c3 = ctr[3];
  ctr[0] = hi1 ^ c1 ^ key[0];
  ctr[1] = lo1;
  ctr[2] = hi0 ^ c3 ^ key[1];
  ctr[3] = lo0;
}

inline void philox4x32_10(std::uint32_t ctr[4], std::uint32_t k0, std::uint32_t k1) {
  std::uint32_t key[2] = {k0, k1};
  for (int r = 0; r < kPhiloxRounds; ++r) {
    if (r > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    philox_round(ctr, key);
  }
}

/// Uniform on [0, 1) with 52 random bits, from the top bits of a 64-bit word.
inline double unit_from_bits(std::uint64_t w) {
  return std::bit_cast<double>(kOneBits | (w >> 12)) - 1.0;
}

/// Natural log for x in (0, 1].
inline double log_unit(double x) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  double e = static_cast<double>(bits >> 52) - 1022.0;
  const double m = std::bit_cast<double>((bits & kMantissaMask) | kHalfBits);
  double t;
  if (m < kSqrtHalf) {
    e = e - 1.0;
    t = (m + m) - 1.0;
  } else {
    t = m - 1.0;
  }
  const double z = t * t;
  double p = kLogP[0];
  for (int k = 1; k < 6; ++k) p = p * t + kLogP[k];
  double q = t + kLogQ[0];
  for (int k = 1; k < 5; ++k) q = q * t + kLogQ[k];
  double y = t * (z * p / q);
  y = y - e * kLn2Lo;
  y = y - 0.5 * z;
  double r = t + y;
  r = r + e * kLn2Hi;
  return r;
}

/// sin and cos of 2*pi*u for u in [0, 1).
inline void sincos_turn(double u, double& s, double& c) {
  const double q = std::nearbyint(u * 4.0);
  const double x = (u - q * 0.25) * kTwoPi;
  const double z = x * x;
  double ps = kSinC[0];
  for (int k = 1; k < 6; ++k) ps = ps * z + kSinC[k];
  double pc = kCosC[0];
  for (int k = 1; k < 6; ++k) pc = pc * z + kCosC[k];
  const double sr = x + x * (z * ps);
  const double cr = (1.0 - 0.5 * z) + (z * z) * pc;
  const bool swap = q == 1.0 || q == 3.0;
  const bool neg_cos = q == 1.0 || q == 2.0;
  const bool neg_sin = q == 2.0 || q == 3.0;
  double co = swap ? sr : cr;
  double si = swap ? cr : sr;
  if (neg_cos) co = -co;
  if (neg_sin) si = -si;
  s = si;
  c = co;
}

inline void gaussian_pair(const std::uint32_t* w, double* out) {
  const std::uint64_t a = (std::uint64_t{w[1]} << 32) | w[0];
  const std::uint64_t b = (std::uint64_t{w[3]} << 32) | w[2];
  const double u1 = unit_from_bits(a) + kHalfUlp;
  const double u2 = unit_from_bits(b);
  const double r = std::sqrt(-2.0 * log_unit(u1));
  double s, c;
  sincos_turn(u2, s, c);
  out[0] = r * c;
  out[1] = r * s;
}

}  // namespace stochavg::simd::detail
