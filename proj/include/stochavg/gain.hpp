#pragma once

#include <cstddef>
#include <cstdint>

namespace stochavg::gain {

/// Power-law step size c(k) = a / (k + k0)^gamma. gamma = 0 is a fixed gain.
struct GainSchedule {
  double a = 1.0;
  std::uint64_t k0 = 1;
  double gamma = 0.75;

  double operator()(std::uint64_t k) const { return gain_at(k); }
  double gain_at(std::uint64_t k) const;
};

struct GainFlags {
  bool a3 = false;  // sum c = inf, sum c^2 < inf
  bool a4 = false;  // c decreasing to 0 with c(k) = O(c(k+h))
};

/// Throws InvalidArgument for a <= 0, k0 < 1 or gamma < 0.
void require_valid(const GainSchedule& s);

GainFlags validate(const GainSchedule& s);

/// A series value with a rigorous bracket [lower, upper].
struct SeriesSum {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t terms = 0;  // explicit terms before the tail estimate
};

inline constexpr double kSeriesTol = 1e-10;

/// sum_k c(k)^2 and sum_k c(k)^3. Throws Divergent unless A3 holds.
SeriesSum sum_c_squared(const GainSchedule& s, double tol = kSeriesTol);
SeriesSum sum_c_cubed(const GainSchedule& s, double tol = kSeriesTol);

}  // namespace stochavg::gain
