#include "stochavg/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stochavg/error.hpp"

namespace stochavg::noise {

namespace {

void require_envelope(double sigma, double b) {
  if (!(std::isfinite(sigma) && sigma >= 0.0 && std::isfinite(b) && b >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "intensity envelope needs finite sigma >= 0 and b >= 0");
  }
}

}  // namespace

IntensityFunction IntensityFunction::affine(double sigma, double b) {
  require_envelope(sigma, b);
  IntensityFunction f;
  f.form_ = Form::Affine;
  f.sigma_ = sigma;
  f.b_ = b;
  f.label_ = "affine";
  return f;
}

IntensityFunction IntensityFunction::additive(double b) {
  auto f = affine(0.0, b);
  f.form_ = Form::AdditiveOnly;
  f.label_ = "additive";
  return f;
}

IntensityFunction IntensityFunction::multiplicative(double sigma) {
  auto f = affine(sigma, 0.0);
  f.form_ = Form::MultiplicativeOnly;
  f.label_ = "multiplicative";
  return f;
}

IntensityFunction IntensityFunction::tabulated(std::vector<double> xs, std::vector<double> ys, double sigma,
                                               double b) {
  require_envelope(sigma, b);
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "tabulated intensity needs >= 2 matching (x, y) points");
  }
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!std::isfinite(xs[k]) || !std::isfinite(ys[k])) throw Error(ErrorKind::NonFinite, "tabulated intensity point");
    if (k > 0 && !(xs[k] > xs[k - 1])) throw Error(ErrorKind::InvalidArgument, "tabulated x must be increasing");
  }
  IntensityFunction f;
  f.form_ = Form::Tabulated;
  f.sigma_ = sigma;
  f.b_ = b;
  f.xs_ = std::move(xs);
  f.ys_ = std::move(ys);
  f.label_ = "tabulated";
  return f;
}

IntensityFunction IntensityFunction::custom(std::function<double(double)> fn, double sigma, double b,
                                            std::string label) {
  require_envelope(sigma, b);
  if (!fn) throw Error(ErrorKind::InvalidArgument, "custom intensity without a function");
  IntensityFunction f;
  f.form_ = Form::Custom;
  f.sigma_ = sigma;
  f.b_ = b;
  f.fn_ = std::move(fn);
  f.label_ = std::move(label);
  return f;
}

bool IntensityFunction::is_affine() const noexcept {
  return form_ == Form::Affine || form_ == Form::AdditiveOnly || form_ == Form::MultiplicativeOnly;
}

double IntensityFunction::operator()(double x) const {
  switch (form_) {
    case Form::Affine:
    case Form::AdditiveOnly:
    case Form::MultiplicativeOnly:
      return sigma_ * std::abs(x) + b_;
    case Form::Tabulated: {
      if (x <= xs_.front()) return ys_.front();
      if (x >= xs_.back()) return ys_.back();
      const auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
      const std::size_t lo = hi - 1;
      const double t = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
      return ys_[lo] + t * (ys_[hi] - ys_[lo]);
    }
    case Form::Custom:
      return fn_(x);
  }
  return 0.0;
}

double evaluate_intensity(const IntensityFunction& f, double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "intensity argument is not finite");
  const double v = f(x);
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "intensity value is not finite");
  return v;
}

EnvelopeReport certify_envelope(const IntensityFunction& f, std::size_t probes, double range,
                                const rng::CounterStream& stream) {
  if (probes == 0) throw Error(ErrorKind::InvalidArgument, "certify_envelope needs probes >= 1");
  EnvelopeReport rep{f.sigma(), f.b(), true, 0.0};
  double worst = -std::numeric_limits<double>::infinity();
  auto probe = [&](double x) {
    const double v = f(x);
    const double bound = f.sigma() * std::abs(x) + f.b();
    const double excess = std::isfinite(v) ? std::abs(v) - bound : std::numeric_limits<double>::infinity();
    if (excess > worst) {
      worst = excess;
      rep.worst_x = x;
    }
    if (excess > 1e-12 * (1.0 + bound)) rep.ok = false;
  };
  constexpr std::size_t kGrid = 2000;
  for (std::size_t k = 0; k <= kGrid; ++k) probe(-range + 2.0 * range * static_cast<double>(k) / kGrid);
  std::vector<double> u(probes);
  stream.uniforms(0, u);
  for (double v : u) probe(range * (2.0 * v - 1.0));
  return rep;
}

IntensityField::IntensityField(std::size_t n, IntensityFunction shared)
    : n_(n), slot_(n * n, 0), sigma_(n * n, shared.sigma()), b_(n * n, shared.b()) {
  all_affine_ = shared.is_affine();
  functions_.push_back(std::move(shared));
}

void IntensityField::set(std::size_t from, std::size_t to, IntensityFunction f) {
  if (from >= n_ || to >= n_) throw Error(ErrorKind::DimensionMismatch, "intensity channel out of range");
  const std::size_t ch = to * n_ + from;
  sigma_[ch] = f.sigma();
  b_[ch] = f.b();
  functions_.push_back(std::move(f));
  slot_[ch] = functions_.size() - 1;
  all_affine_ = std::all_of(functions_.begin(), functions_.end(), [](const auto& g) { return g.is_affine(); });
}

const IntensityFunction& IntensityField::at(std::size_t from, std::size_t to) const {
  return functions_[slot_[to * n_ + from]];
}

double IntensityField::max_sigma() const { return *std::max_element(sigma_.begin(), sigma_.end()); }
double IntensityField::max_b() const { return *std::max_element(b_.begin(), b_.end()); }

const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::IidGaussian: return "iid_gaussian";
    case NoiseKind::IidUniform: return "iid_uniform";
    case NoiseKind::TemporallyDependent: return "temporally_dependent";
    case NoiseKind::SpatiallyCorrelated: return "spatially_correlated";
  }
  return "?";
}

namespace {

std::vector<double> require_scales(std::size_t n, std::vector<double> s, const char* what) {
  if (s.size() != n * n) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " needs n^2 = " + std::to_string(n * n) + " entries");
  }
  for (double v : s)
    if (!(std::isfinite(v) && v >= 0.0)) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be >= 0");
  return s;
}

}  // namespace

NoiseModel NoiseModel::iid_gaussian(std::size_t n, double stddev) {
  return iid_gaussian(n, std::vector<double>(n * n, stddev));
}

NoiseModel NoiseModel::iid_gaussian(std::size_t n, std::vector<double> stddev) {
  NoiseModel m;
  m.kind_ = NoiseKind::IidGaussian;
  m.n_ = n;
  m.scale_ = require_scales(n, std::move(stddev), "std");
  for (double s : m.scale_) m.beta_ += s * s;
  return m;
}

NoiseModel NoiseModel::iid_uniform(std::size_t n, double half_width) {
  return iid_uniform(n, std::vector<double>(n * n, half_width));
}

NoiseModel NoiseModel::iid_uniform(std::size_t n, std::vector<double> half_width) {
  NoiseModel m;
  m.kind_ = NoiseKind::IidUniform;
  m.n_ = n;
  m.scale_ = require_scales(n, std::move(half_width), "half_width");
  for (double h : m.scale_) m.beta_ += h * h / 3.0;
  return m;
}

NoiseModel NoiseModel::temporally_dependent(std::size_t n, double driver_std) {
  return temporally_dependent(
      n, driver_std, [](double v) { return std::sqrt(1.0 + std::min(v * v, 1.0)); }, std::sqrt(2.0));
}

NoiseModel NoiseModel::temporally_dependent(std::size_t n, double driver_std, std::function<double(double)> g,
                                            double g_max) {
  if (!(driver_std >= 0.0 && std::isfinite(driver_std))) throw Error(ErrorKind::InvalidArgument, "driver std");
  if (!(g_max >= 0.0 && std::isfinite(g_max)) || !g) throw Error(ErrorKind::InvalidArgument, "coupling bound");
  NoiseModel m;
  m.kind_ = NoiseKind::TemporallyDependent;
  m.n_ = n;
  m.driver_std_ = driver_std;
  m.g_max_ = g_max;
  m.coupling_ = std::move(g);
  m.beta_ = static_cast<double>(n * n) * driver_std * driver_std * g_max * g_max;
  return m;
}

NoiseModel NoiseModel::spatially_correlated(std::size_t n, Matrix mixing, double driver_std) {
  if (mixing.rows() != n * n || mixing.cols() != n * n) {
    throw Error(ErrorKind::DimensionMismatch, "mixing matrix must be n^2 x n^2");
  }
  if (!(driver_std >= 0.0 && std::isfinite(driver_std))) throw Error(ErrorKind::InvalidArgument, "driver std");
  NoiseModel m;
  m.kind_ = NoiseKind::SpatiallyCorrelated;
  m.n_ = n;
  m.driver_std_ = driver_std;
  const double fro = linalg::frobenius_norm(mixing);
  m.beta_ = driver_std * driver_std * fro * fro;
  m.mixing_ = std::move(mixing);
  return m;
}

void NoiseModel::declare_beta(double beta) {
  if (!(std::isfinite(beta) && beta >= beta_ * (1.0 - 1e-12))) {
    throw Error(ErrorKind::InvalidArgument,
                "declared beta " + std::to_string(beta) + " is below the model's bound " + std::to_string(beta_));
  }
  beta_ = beta;
}

namespace {

thread_local std::vector<double> t_drivers;

}  // namespace

void sample_noise(const NoiseModel& model, std::uint64_t k, NoiseState& state, const rng::CounterStream& stream,
                  std::span<double> out) {
  const std::size_t m = model.channels();
  if (out.size() != m) throw Error(ErrorKind::DimensionMismatch, "noise buffer must hold n^2 channels");
  switch (model.kind()) {
    case NoiseKind::IidGaussian: {
      stream.normals(k, out);
      const auto& s = model.scale();
      for (std::size_t c = 0; c < m; ++c) out[c] *= s[c];
      break;
    }
    case NoiseKind::IidUniform: {
      stream.uniforms(k, out);
      const auto& h = model.scale();
      for (std::size_t c = 0; c < m; ++c) out[c] = h[c] * (2.0 * out[c] - 1.0);
      break;
    }
    case NoiseKind::TemporallyDependent: {
      if (state.previous.size() != m) state.previous.assign(m, 0.0);
      stream.normals(k, out);
      const double s = model.driver_std();
      for (std::size_t c = 0; c < m; ++c) out[c] = s * out[c] * model.coupling(state.previous[c]);
      std::copy(out.begin(), out.end(), state.previous.begin());
      break;
    }
    case NoiseKind::SpatiallyCorrelated: {
      t_drivers.resize(m);
      stream.normals(k, t_drivers);
      const double s = model.driver_std();
      const Matrix& c = model.mixing();
      for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        const auto row = c.row(r);
        for (std::size_t q = 0; q < m; ++q) acc += row[q] * t_drivers[q];
        out[r] = s * acc;
      }
      break;
    }
  }
}

MartingaleReport empirical_martingale_check(const NoiseModel& model, std::size_t horizon, std::size_t trials,
                                            std::uint64_t seed) {
  NoiseState state;
  std::uint64_t current_trial = ~std::uint64_t{0};
  rng::CounterStream stream(seed, 0, rng::Substream::Noise);
  NoiseProcess process = [&](std::uint64_t trial, std::uint64_t k, std::span<double> out) {
    if (trial != current_trial) {
      current_trial = trial;
      state = NoiseState{};
      stream = rng::CounterStream(seed, trial, rng::Substream::Noise);
    }
    sample_noise(model, k, state, stream, out);
  };
  return empirical_martingale_check(process, model.channels(), model.beta(), horizon, trials);
}

MartingaleReport empirical_martingale_check(const NoiseProcess& process, std::size_t channels, double beta,
                                            std::size_t horizon, std::size_t trials) {
  if (horizon == 0 || trials == 0) throw Error(ErrorKind::InvalidArgument, "horizon and trials must be >= 1");
  const std::size_t buckets = std::min<std::size_t>(10, horizon);
  constexpr std::size_t kBins = 3;
  const std::size_t cells = buckets * kBins;
  // Previous-value band: half the average per-channel standard deviation.
  const double band = 0.5 * std::sqrt(beta / static_cast<double>(channels));

  // Across-trial sums for the ratio estimator sum(S)/sum(C).
  std::vector<double> sum_s(cells, 0.0), sum_c(cells, 0.0), sum_ss(cells, 0.0), sum_sc(cells, 0.0),
      sum_cc(cells, 0.0);
  std::vector<double> m1(horizon, 0.0), m2(horizon, 0.0);  // per-step sums of ||xi||^2 and its square

  std::vector<double> xi(channels), prev(channels);
  std::vector<double> s(cells), c(cells);
  for (std::size_t t = 0; t < trials; ++t) {
    std::fill(prev.begin(), prev.end(), 0.0);
    std::fill(s.begin(), s.end(), 0.0);
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t k = 0; k < horizon; ++k) {
      process(t, k, xi);
      const std::size_t bucket = k * buckets / horizon;
      double norm_sq = 0.0;
      for (std::size_t ch = 0; ch < channels; ++ch) {
        const int bin = prev[ch] < -band ? 0 : (prev[ch] > band ? 2 : 1);
        const std::size_t cell = bucket * kBins + static_cast<std::size_t>(bin);
        s[cell] += xi[ch];
        c[cell] += 1.0;
        norm_sq += xi[ch] * xi[ch];
      }
      m1[k] += norm_sq;
      m2[k] += norm_sq * norm_sq;
      prev.swap(xi);
      xi.resize(channels);
    }
    for (std::size_t q = 0; q < cells; ++q) {
      sum_s[q] += s[q];
      sum_c[q] += c[q];
      sum_ss[q] += s[q] * s[q];
      sum_sc[q] += s[q] * c[q];
      sum_cc[q] += c[q] * c[q];
    }
  }

  MartingaleReport rep;
  rep.beta = beta;
  for (std::size_t q = 0; q < cells; ++q) {
    if (sum_c[q] == 0.0) continue;
    MartingaleCell cell;
    cell.bucket = q / kBins;
    cell.bin = static_cast<int>(q % kBins) - 1;
    cell.count = static_cast<std::size_t>(sum_c[q]);
    cell.mean = sum_s[q] / sum_c[q];
    const double resid = std::max(0.0, sum_ss[q] - 2.0 * cell.mean * sum_sc[q] + cell.mean * cell.mean * sum_cc[q]);
    cell.se = std::sqrt(resid) / sum_c[q];
    if (std::abs(cell.mean) > 4.0 * cell.se) rep.means_ok = false;
    rep.cells.push_back(cell);
  }
  const double m = static_cast<double>(trials);
  for (std::size_t k = 0; k < horizon; ++k) {
    const double mean = m1[k] / m;
    const double var = trials > 1 ? std::max(0.0, (m2[k] - m * mean * mean) / (m - 1.0)) : 0.0;
    const double se = std::sqrt(var / m);
    if (mean > rep.max_second_moment) {
      rep.max_second_moment = mean;
      rep.max_second_moment_se = se;
    }
    const double rel_se = mean > 0.0 ? se / mean : 0.0;
    if (mean > beta * (1.0 + 4.0 * rel_se)) rep.second_moment_ok = false;
  }
  return rep;
}

}  // namespace stochavg::noise
