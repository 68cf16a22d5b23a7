#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "stochavg/error.hpp"
#include "stochavg/gain.hpp"

using namespace stochavg;
using gain::GainSchedule;

TEST_CASE("gain values") {
  CHECK(GainSchedule{1, 1, 1}(0) == 1.0);
  CHECK(GainSchedule{1, 1, 1}(9) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(GainSchedule{2, 4, 0.75}(0) == doctest::Approx(0.7071067811865475).epsilon(1e-15));
  CHECK(GainSchedule{0.3, 5, 0.0}(1000) == 0.3);
  CHECK(oracle::thrown_kind([] { gain::require_valid({0, 1, 1}); }) == ErrorKind::InvalidArgument);
  CHECK(oracle::thrown_kind([] { gain::require_valid({1, 0, 1}); }) == ErrorKind::InvalidArgument);
  CHECK(oracle::thrown_kind([] { gain::require_valid({1, 1, -0.1}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("A3 and A4 flags") {
  CHECK(gain::validate({1, 1, 1}).a3);
  CHECK(gain::validate({1, 1, 0.75}).a3);
  CHECK_FALSE(gain::validate({1, 1, 0.5}).a3);
  CHECK_FALSE(gain::validate({1, 1, 1.5}).a3);
  CHECK(gain::validate({1, 1, 1.5}).a4);
  CHECK_FALSE(gain::validate({1, 1, 0.0}).a4);
  CHECK_FALSE(gain::validate({1, 1, 0.0}).a3);
}

TEST_CASE("gain sums against closed forms") {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const auto s = gain::sum_c_squared({1, 1, 1});
  CHECK(std::abs(s.value - pi2 / 6) <= 1e-10);
  CHECK(std::abs(gain::sum_c_squared({0.5, 1, 1}).value - pi2 / 24) <= 1e-10);
  CHECK(std::abs(gain::sum_c_cubed({1, 1, 1}).value - 1.2020569031595942) <= 1e-10);
  CHECK(std::abs(gain::sum_c_squared({1, 1, 0.75}).value - 2.612375348685488) <= 1e-10);
  CHECK(std::abs(gain::sum_c_cubed({1, 1, 0.75}).value - 1.4602118661586485) <= 1e-10);
  CHECK(std::abs(gain::sum_c_squared({2, 4, 0.75}).value - 4.265487473449359) <= 1e-10);
  CHECK(std::abs(gain::sum_c_cubed({2, 4, 0.75}).value - 1.3244926004047881) <= 1e-10);
  CHECK(std::abs(gain::sum_c_squared({0.3, 10, 0.9}).value - 0.0185646087157892) <= 1e-12);
  CHECK(std::abs(gain::sum_c_cubed({0.3, 10, 0.9}).value - 0.0003450392843638373) <= 1e-13);
  const auto edge = gain::sum_c_squared({1, 1, 0.51});
  CHECK(std::abs(edge.value - 50.57867004101557) <= 1e-9);
  CHECK(edge.upper - edge.lower <= gain::kSeriesTol);
  CHECK(std::abs(gain::sum_c_cubed({1, 1, 0.51}).value - 2.501195905351018) <= 1e-10);
  CHECK(oracle::thrown_kind([] { gain::sum_c_squared({1, 1, 0.5}); }) == ErrorKind::Divergent);
  CHECK(oracle::thrown_kind([] { gain::sum_c_cubed({1, 1, 0.0}); }) == ErrorKind::Divergent);
  CHECK(oracle::thrown_kind([] { gain::sum_c_squared({1, 1, 1.2}); }) == ErrorKind::Divergent);
}

TEST_CASE("series bracket contains the value and the tail bound") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ua(0.05, 3.0), ug(0.6, 1.0);
  std::uniform_int_distribution<int> uk(1, 50);
  for (int t = 0; t < 200; ++t) {
    const GainSchedule g{ua(rng), static_cast<std::uint64_t>(uk(rng)), ug(rng)};
    for (const auto& s : {gain::sum_c_squared(g), gain::sum_c_cubed(g)}) {
      CHECK(s.lower <= s.value);
      CHECK(s.value <= s.upper);
    }
    const auto s = gain::sum_c_squared(g);
    // Partial sum over the explicit terms plus the textbook tail bound.
    double partial = 0.0;
    for (std::size_t k = 0; k < s.terms; ++k) partial += g(k) * g(k);
    const double kk = static_cast<double>(s.terms + g.k0) - 1.0;
    const double tail = g.a * g.a * std::pow(kk, 1.0 - 2 * g.gamma) / (2 * g.gamma - 1);
    CHECK(s.lower >= partial * (1 - 1e-12));
    CHECK(s.upper <= (partial + tail) * (1 + 1e-12));
    CHECK(s.upper - s.lower <= gain::kSeriesTol);
  }
}

TEST_CASE("gains decrease with ratio to the h-shift tending to one") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ug(0.1, 1.0);
  for (int t = 0; t < 100; ++t) {
    const GainSchedule g{1.0 + t, 1 + static_cast<std::uint64_t>(t % 7), ug(rng)};
    for (std::uint64_t k = 0; k < 500; ++k) CHECK(g(k + 1) < g(k));
    const std::uint64_t h = 1 + t % 5;
    double prev = INFINITY;
    for (std::uint64_t k : {10ull, 1000ull, 100000ull, 10000000ull}) {
      const double r = g(k) / g(k + h);
      CHECK(r >= 1.0);
      CHECK(r < prev);
      prev = r;
    }
    CHECK(prev - 1.0 < 1e-6);
  }
}
