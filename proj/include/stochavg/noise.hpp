#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stochavg/linalg.hpp"
#include "stochavg/rng.hpp"

namespace stochavg::noise {

using linalg::Matrix;

/// Noise intensity f applied to the relative state x_j - x_i, with a declared
/// envelope |f(x)| <= sigma |x| + b.
class IntensityFunction {
 public:
  enum class Form { Affine, AdditiveOnly, MultiplicativeOnly, Tabulated, Custom };

  static IntensityFunction affine(double sigma, double b);
  static IntensityFunction additive(double b);
  static IntensityFunction multiplicative(double sigma);
  /// Piecewise-linear through (xs, ys), constant beyond the end points.
  static IntensityFunction tabulated(std::vector<double> xs, std::vector<double> ys, double sigma, double b);
  static IntensityFunction custom(std::function<double(double)> f, double sigma, double b, std::string label = "custom");

  Form form() const noexcept { return form_; }
  double sigma() const noexcept { return sigma_; }
  double b() const noexcept { return b_; }
  /// Affine-family forms evaluate as sigma |x| + b exactly.
  bool is_affine() const noexcept;
  const std::string& label() const noexcept { return label_; }
  const std::vector<double>& table_x() const noexcept { return xs_; }
  const std::vector<double>& table_y() const noexcept { return ys_; }

  double operator()(double x) const;

 private:
  IntensityFunction() = default;

  Form form_ = Form::Affine;
  double sigma_ = 0.0;
  double b_ = 0.0;
  std::vector<double> xs_, ys_;
  std::function<double(double)> fn_;
  std::string label_;
};

/// Throws NonFinite for non-finite x.
double evaluate_intensity(const IntensityFunction& f, double x);

struct EnvelopeReport {
  double sigma = 0.0;
  double b = 0.0;
  bool ok = true;
  double worst_x = 0.0;  // probe with the largest |f| - envelope
};

/// Probes |f(x)| <= sigma |x| + b on a dense grid over [-range, range] plus
/// `probes` random points drawn from the stream.
EnvelopeReport certify_envelope(const IntensityFunction& f, std::size_t probes, double range,
                                const rng::CounterStream& stream);

/// Intensity per ordered channel (j -> i), with a shared default.
class IntensityField {
 public:
  IntensityField(std::size_t n, IntensityFunction shared);

  void set(std::size_t from, std::size_t to, IntensityFunction f);
  const IntensityFunction& at(std::size_t from, std::size_t to) const;

  std::size_t n() const noexcept { return n_; }
  bool all_affine() const noexcept { return all_affine_; }
  /// Channel layout i*n + j for channel (j -> i); valid when all_affine().
  std::span<const double> sigma_channels() const noexcept { return sigma_; }
  std::span<const double> b_channels() const noexcept { return b_; }
  double max_sigma() const;
  double max_b() const;
  const IntensityFunction& shared() const noexcept { return functions_.front(); }
  /// Distinct functions: index 0 is the shared default.
  const std::vector<IntensityFunction>& functions() const noexcept { return functions_; }

 private:
  std::size_t n_;
  std::vector<IntensityFunction> functions_;
  std::vector<std::size_t> slot_;  // per channel index into functions_
  std::vector<double> sigma_, b_;
  bool all_affine_ = true;
};

enum class NoiseKind { IidGaussian, IidUniform, TemporallyDependent, SpatiallyCorrelated };

const char* to_string(NoiseKind k);

/// Martingale-difference measurement noise over the n^2 channels, stacked as
/// index i*n + j for channel (j -> i).
class NoiseModel {
 public:
  static NoiseModel iid_gaussian(std::size_t n, double stddev);
  static NoiseModel iid_gaussian(std::size_t n, std::vector<double> stddev);
  static NoiseModel iid_uniform(std::size_t n, double half_width);
  static NoiseModel iid_uniform(std::size_t n, std::vector<double> half_width);
  /// xi(k) = eta(k) * g(xi(k-1)) channelwise, eta i.i.d. N(0, driver_std^2)
  /// and |g| <= g_max. The default g(v) = sqrt(1 + min(v^2, 1)).
  static NoiseModel temporally_dependent(std::size_t n, double driver_std);
  static NoiseModel temporally_dependent(std::size_t n, double driver_std, std::function<double(double)> g,
                                         double g_max);
  /// xi(k) = C z(k) with z i.i.d. N(0, driver_std^2); C is n^2 x n^2.
  static NoiseModel spatially_correlated(std::size_t n, Matrix mixing, double driver_std = 1.0);

  NoiseKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t channels() const noexcept { return n_ * n_; }
  /// sup_k E[||xi(k)||^2 | past] <= beta, exact for the construction.
  double beta() const noexcept { return beta_; }
  /// Replace beta by a looser declared bound (must not be smaller).
  void declare_beta(double beta);

  const std::vector<double>& scale() const noexcept { return scale_; }
  const Matrix& mixing() const noexcept { return mixing_; }
  double driver_std() const noexcept { return driver_std_; }
  double g_max() const noexcept { return g_max_; }
  double coupling(double v) const { return coupling_(v); }

 private:
  NoiseModel() = default;

  NoiseKind kind_ = NoiseKind::IidGaussian;
  std::size_t n_ = 0;
  double beta_ = 0.0;
  std::vector<double> scale_;  // per-channel std or half-width
  Matrix mixing_;
  double driver_std_ = 1.0;
  double g_max_ = 1.0;
  std::function<double(double)> coupling_;
};

struct NoiseState {
  std::vector<double> previous;  // last output, for temporally dependent noise
};

/// Writes xi(k) into out (size n^2) and advances state.
void sample_noise(const NoiseModel& model, std::uint64_t k, NoiseState& state, const rng::CounterStream& stream,
                  std::span<double> out);

/// A noise process under test: fill `out` with xi(k) for the given trial.
/// Called with k = 0, 1, ... in order for each trial.
using NoiseProcess = std::function<void(std::uint64_t trial, std::uint64_t k, std::span<double> out)>;

struct MartingaleCell {
  std::size_t bucket = 0;  // time bucket
  int bin = 0;             // -1, 0, +1: previous value of the channel below, within, above the band
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

struct MartingaleReport {
  std::vector<MartingaleCell> cells;
  double max_second_moment = 0.0;
  double max_second_moment_se = 0.0;
  double beta = 0.0;
  bool means_ok = true;
  bool second_moment_ok = true;
  bool pass() const noexcept { return means_ok && second_moment_ok; }
};

MartingaleReport empirical_martingale_check(const NoiseModel& model, std::size_t horizon, std::size_t trials,
                                            std::uint64_t seed);
MartingaleReport empirical_martingale_check(const NoiseProcess& process, std::size_t channels, double beta,
                                            std::size_t horizon, std::size_t trials);

}  // namespace stochavg::noise
