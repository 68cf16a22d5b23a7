#include "stochavg/rng.hpp"

#include <bit>
#include <limits>
#include <vector>

#include "simd/kernel_math.hpp"
#include "stochavg/error.hpp"

namespace stochavg::rng {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterStream::CounterStream(std::uint64_t base_seed, std::uint64_t trial, Substream sub) {
  if (trial > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::InvalidArgument, "trial index exceeds 2^32 - 1");
  }
  const std::uint64_t k = splitmix64(splitmix64(base_seed) ^ (static_cast<std::uint64_t>(sub) * 0xD1B54A32D192ED03ull));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  trial_ = static_cast<std::uint32_t>(trial);
}

simd::PhiloxCounterTail CounterStream::tail(std::uint64_t step) const {
  return {static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), trial_};
}

void CounterStream::words(std::uint64_t step, std::uint32_t first_block, std::span<std::uint32_t> out) const {
  simd::active_kernels().philox_blocks(key_, tail(step), first_block, out.size() / 4, out.data());
}

namespace {

thread_local std::vector<std::uint32_t> t_words;

}  // namespace

void CounterStream::normals(std::uint64_t step, std::span<double> out) const {
  const std::size_t pairs = (out.size() + 1) / 2;
  t_words.resize(4 * pairs);
  const auto& k = simd::active_kernels();
  k.philox_blocks(key_, tail(step), 0, pairs, t_words.data());
  const std::size_t full = out.size() / 2;
  k.gaussian_pairs(t_words.data(), full, out.data());
  if (full < pairs) {
    double last[2];
    simd::detail::gaussian_pair(t_words.data() + 4 * full, last);
    out[out.size() - 1] = last[0];
  }
}

void CounterStream::uniforms(std::uint64_t step, std::span<double> out) const {
  const std::size_t blocks = (out.size() + 1) / 2;
  t_words.resize(4 * blocks);
  simd::active_kernels().philox_blocks(key_, tail(step), 0, blocks, t_words.data());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint64_t w = (std::uint64_t{t_words[2 * i + 1]} << 32) | t_words[2 * i];
    out[i] = simd::detail::unit_from_bits(w);
  }
}

double CounterStream::uniform(std::uint64_t step) const {
  std::uint32_t ctr[4] = {0, static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), trial_};
  simd::detail::philox4x32_10(ctr, key_.k0, key_.k1);
  return simd::detail::unit_from_bits((std::uint64_t{ctr[1]} << 32) | ctr[0]);
}

}  // namespace stochavg::rng
