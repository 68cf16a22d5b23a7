#include "stochavg/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "stochavg/error.hpp"
#include "stochavg/rng.hpp"
#include "stochavg/simd/kernels.hpp"

namespace stochavg::engine {

void SimConfig::validate() const {
  const std::size_t n = x0.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "x0 must hold at least one agent");
  for (double v : x0)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "x0 entry is not finite");
  if (flow.n() != n) throw Error(ErrorKind::DimensionMismatch, "flow size differs from x0");
  if (noise.n() != n) throw Error(ErrorKind::DimensionMismatch, "noise size differs from x0");
  if (intensities.n() != n) throw Error(ErrorKind::DimensionMismatch, "intensity field size differs from x0");
  gain::require_valid(gain);
  if (record_stride < 1) throw Error(ErrorKind::InvalidArgument, "record_stride must be >= 1");
  if (trials < 1) throw Error(ErrorKind::InvalidArgument, "trials must be >= 1");
}

namespace {

void step_generic(std::span<const double> x, const Digraph& g, double c, std::span<const double> xi,
                  const IntensityField& f, std::span<double> out) {
  const std::size_t n = x.size();
  const auto a = g.adjacency().data();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = a[i * n + j];
      if (w == 0.0) continue;
      const double d = x[j] - x[i];
      acc += w * (d + f.at(j, i)(d) * xi[i * n + j]);
    }
    out[i] = x[i] + c * acc;
  }
}

void step_fast(std::span<const double> x, const Digraph& g, double c, std::span<const double> xi,
               const IntensityField& f, std::span<double> out) {
  if (!f.all_affine()) {
    step_generic(x, g, c, xi, f, out);
    return;
  }
  const simd::RelaxArgs args{x.size(),
                             x.data(),
                             g.adjacency().data().data(),
                             f.sigma_channels().data(),
                             f.b_channels().data(),
                             xi.data(),
                             c,
                             out.data()};
  simd::active_kernels().relax_rows(args);
}

double spread(std::span<const double> x, double& centroid) {
  double sum = 0.0;
  for (double v : x) sum += v;
  centroid = sum / static_cast<double>(x.size());
  double v2 = 0.0;
  for (double v : x) v2 += (v - centroid) * (v - centroid);
  return v2;
}

}  // namespace

void step_agentwise(std::span<const double> x, const Digraph& g, double c, std::span<const double> xi,
                    const IntensityField& f, std::span<double> out) {
  const std::size_t n = x.size();
  if (g.n() != n || out.size() != n || xi.size() != n * n || f.n() != n) {
    throw Error(ErrorKind::DimensionMismatch, "step_agentwise: state, graph, noise and intensities disagree");
  }
  step_fast(x, g, c, xi, f, out);
  for (double v : out)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "state left the representable range");
}

std::vector<std::uint64_t> sample_times(std::uint64_t horizon, std::uint64_t stride) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "record_stride must be >= 1");
  std::vector<std::uint64_t> t;
  t.reserve(horizon / stride + 2);
  for (std::uint64_t k = 0; k <= horizon; k += stride) t.push_back(k);
  if (t.back() != horizon) t.push_back(horizon);
  return t;
}

TrialResult run_trial(const SimConfig& cfg, std::uint64_t trial) {
  cfg.validate();
  const std::size_t n = cfg.n();
  const rng::CounterStream flow_stream(cfg.base_seed, trial, rng::Substream::Flow);
  const rng::CounterStream noise_stream(cfg.base_seed, trial, rng::Substream::Noise);
  flows::SamplerState sampler;
  noise::NoiseState noise_state;

  TrialResult r;
  r.times = sample_times(cfg.horizon, cfg.record_stride);
  r.v.reserve(r.times.size());
  r.centroid.reserve(r.times.size());
  if (cfg.record_state) r.states.reserve(r.times.size() * n);

  std::vector<double> x = cfg.x0, next(n), xi(n * n);
  std::size_t slot = 0;
  auto observe = [&](std::uint64_t k) {
    double centroid = 0.0;
    const double v = spread(x, centroid);
    r.delta_norm_sum += std::sqrt(v);
    if (slot < r.times.size() && r.times[slot] == k) {
      r.v.push_back(v);
      r.centroid.push_back(centroid);
      if (cfg.record_state) r.states.insert(r.states.end(), x.begin(), x.end());
      ++slot;
    }
    r.final_v = v;
    r.final_centroid = centroid;
  };

  observe(0);
  for (std::uint64_t k = 0; k < cfg.horizon; ++k) {
    const Digraph& g = flows::sample_graph(cfg.flow, sampler, flow_stream);
    noise::sample_noise(cfg.noise, k, noise_state, noise_stream, xi);
    step_fast(x, g, cfg.gain(k), xi, cfg.intensities, next);
    double peak = 0.0;
    for (double v : next) peak = std::max(peak, std::abs(v));
    if (!std::isfinite(peak)) {
      throw Error(ErrorKind::NonFinite,
                  "trial " + std::to_string(trial) + " step " + std::to_string(k) + ": state is not finite");
    }
    if (peak > kDivergenceLimit) {
      throw Error(ErrorKind::Divergent, "trial " + std::to_string(trial) + " step " + std::to_string(k) +
                                            ": |x| exceeded 1e12");
    }
    x.swap(next);
    observe(k + 1);
  }
  r.final_x = x;
  return r;
}

double rate_at_end(const TrialResult& t, const gain::GainSchedule& g, std::uint64_t horizon) {
  if (horizon == 0) return 0.0;
  const double k = static_cast<double>(horizon);
  return std::sqrt(g(horizon) * k) * t.delta_norm_sum / k;
}

std::size_t thread_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("STOCHAVG_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Running mean and sum of squared deviations, merged with Chan's rule.
struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * (o.count / total);
    m2 += o.m2 + d * d * (count * o.count / total);
    count = total;
  }
};

struct ChunkResult {
  std::vector<Moments> v;
  std::exception_ptr error;
};

// Pairwise sum keeps the rounding independent of how trials were scheduled.
double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

}  // namespace

EnsembleStats run_ensemble(const SimConfig& cfg, const EnsembleOptions& opt, std::vector<TrialResult>* kept) {
  cfg.validate();
  const std::size_t m = cfg.trials;
  const std::size_t chunk = std::max<std::size_t>(1, opt.chunk);
  const std::size_t chunks = (m + chunk - 1) / chunk;
  const auto times = sample_times(cfg.horizon, cfg.record_stride);

  EnsembleStats st;
  st.trials = m;
  st.times = times;
  st.final_centroids.assign(m, 0.0);
  st.final_v.assign(m, 0.0);
  std::vector<double> rates(m, 0.0);
  if (kept) {
    kept->clear();
    kept->resize(m);
  }

  std::vector<ChunkResult> results(chunks);
  std::atomic<std::size_t> next_chunk{0};
  // Chunks after the earliest failure are skipped; earlier ones still run so
  // the reported error is the one with the lowest trial index.
  std::atomic<std::size_t> first_failed{chunks};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunks || c > first_failed.load()) return;
      ChunkResult& out = results[c];
      out.v.assign(times.size(), Moments{});
      try {
        for (std::size_t t = c * chunk; t < std::min(m, (c + 1) * chunk); ++t) {
          TrialResult r = run_trial(cfg, t);
          for (std::size_t s = 0; s < times.size(); ++s) out.v[s].add(r.v[s]);
          st.final_centroids[t] = r.final_centroid;
          st.final_v[t] = r.final_v;
          rates[t] = rate_at_end(r, cfg.gain, cfg.horizon);
          if (kept) (*kept)[t] = std::move(r);
        }
      } catch (...) {
        out.error = std::current_exception();
        std::size_t seen = first_failed.load();
        while (c < seen && !first_failed.compare_exchange_weak(seen, c)) {
        }
      }
    }
  };

  const std::size_t threads = std::min(thread_count(opt.threads), chunks);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& r : results)
    if (r.error) std::rethrow_exception(r.error);

  std::vector<Moments> v(times.size());
  for (const auto& r : results)
    for (std::size_t s = 0; s < times.size(); ++s) v[s].merge(r.v[s]);
  const double md = static_cast<double>(m);
  st.mean_v.resize(times.size());
  st.se_v.resize(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    st.mean_v[s] = v[s].mean;
    st.se_v[s] = m > 1 ? std::sqrt(v[s].m2 / (md - 1.0) / md) : 0.0;
  }

  st.mean_centroid = pairwise_sum(st.final_centroids) / md;
  if (m > 1) {
    std::vector<double> dev(m);
    for (std::size_t t = 0; t < m; ++t) {
      const double d = st.final_centroids[t] - st.mean_centroid;
      dev[t] = d * d;
    }
    st.var_centroid = pairwise_sum(dev) / (md - 1.0);
    st.se_centroid = std::sqrt(st.var_centroid / md);
  }
  st.mean_final_v = pairwise_sum(st.final_v) / md;
  st.max_final_v = *std::max_element(st.final_v.begin(), st.final_v.end());
  st.mean_rate_end = pairwise_sum(rates) / md;
  return st;
}

}  // namespace stochavg::engine
