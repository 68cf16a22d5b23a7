#include "stochavg/gain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stochavg/error.hpp"

namespace stochavg::gain {

double GainSchedule::gain_at(std::uint64_t k) const {
  return a / std::pow(static_cast<double>(k) + static_cast<double>(k0), gamma);
}

void require_valid(const GainSchedule& s) {
  if (!(std::isfinite(s.a) && s.a > 0.0)) throw Error(ErrorKind::InvalidArgument, "gain scale a must be > 0");
  if (s.k0 < 1) throw Error(ErrorKind::InvalidArgument, "gain offset k0 must be >= 1");
  if (!(std::isfinite(s.gamma) && s.gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gain exponent must be >= 0");
}

GainFlags validate(const GainSchedule& s) {
  require_valid(s);
  return {s.gamma > 0.5 && s.gamma <= 1.0, s.gamma > 0.0};
}

namespace {

constexpr std::size_t kMaxTerms = std::size_t{1} << 22;
constexpr std::size_t kMinTerms = 64;

// sum_{k >= 0} (a / (k + k0)^gamma)^p: explicit terms below m = K + k0, then
// Euler-Maclaurin for the tail f(x) = a^p x^-s with s = p gamma. f is convex,
// so the trapezoid and midpoint rules bracket the tail:
//   int_m f + f(m)/2 <= sum_{k >= m} f(k) <= int_{m-1/2} f.
SeriesSum power_sum(const GainSchedule& s, int p, double tol) {
  require_valid(s);
  if (!validate(s).a3) {
    throw Error(ErrorKind::Divergent, "gain series diverges for gamma = " + std::to_string(s.gamma));
  }
  const double ap = std::pow(s.a, p);
  const double e = p * s.gamma;
  const double k0 = static_cast<double>(s.k0);
  // Bracket width is just over e f(m) / (8 m); aim at half of tol.
  const double want = std::pow(e * ap / (4.0 * tol), 1.0 / (e + 1.0)) - k0 + 1.0;
  const std::size_t terms =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::min(want, static_cast<double>(kMaxTerms))), kMinTerms,
                              kMaxTerms);

  double partial = 0.0;
  for (std::size_t k = terms; k-- > 0;) partial += ap * std::pow(static_cast<double>(k) + k0, -e);

  const double m = static_cast<double>(terms) + k0;
  auto tail_integral = [&](double from) { return ap * std::pow(from, 1.0 - e) / (e - 1.0); };
  const double fm = ap * std::pow(m, -e);
  const double d1 = -e * fm / m;
  const double d3 = -e * (e + 1.0) * (e + 2.0) * fm / (m * m * m);
  SeriesSum out;
  out.terms = terms;
  out.lower = partial + tail_integral(m) + 0.5 * fm;
  out.upper = partial + tail_integral(m - 0.5);
  out.value = std::clamp(partial + tail_integral(m) + 0.5 * fm - d1 / 12.0 + d3 / 720.0, out.lower, out.upper);
  return out;
}

}  // namespace

SeriesSum sum_c_squared(const GainSchedule& s, double tol) { return power_sum(s, 2, tol); }
SeriesSum sum_c_cubed(const GainSchedule& s, double tol) { return power_sum(s, 3, tol); }

}  // namespace stochavg::gain
