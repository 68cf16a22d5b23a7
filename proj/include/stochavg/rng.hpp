#pragma once

#include <cstdint>
#include <span>

#include "stochavg/simd/kernels.hpp"

namespace stochavg::rng {

/// Independent substreams of one trial. Graph and noise draws never share a
/// stream, so the two processes are independent by construction.
enum class Substream : std::uint32_t {
  Flow = 1,
  Noise = 2,
  Probe = 3,
  Test = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based random stream addressed by (base seed, trial, substream).
/// Every draw is a pure function of its address and the time step, so any
/// trial can be replayed without touching the others.
class CounterStream {
 public:
  CounterStream(std::uint64_t base_seed, std::uint64_t trial, Substream sub);

  /// Raw Philox words for step `step`, blocks [first, first + out.size()/4).
  void words(std::uint64_t step, std::uint32_t first_block, std::span<std::uint32_t> out) const;

  /// Standard normals for step `step`; out.size() may be odd.
  void normals(std::uint64_t step, std::span<double> out) const;

  /// Uniforms on [0, 1) for step `step`.
  void uniforms(std::uint64_t step, std::span<double> out) const;

  /// Single uniform in [0, 1) for step `step`.
  double uniform(std::uint64_t step) const;

  simd::PhiloxKey key() const noexcept { return key_; }

 private:
  simd::PhiloxCounterTail tail(std::uint64_t step) const;

  simd::PhiloxKey key_;
  std::uint32_t trial_;
};

}  // namespace stochavg::rng
