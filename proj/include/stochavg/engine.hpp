#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stochavg/flows.hpp"
#include "stochavg/gain.hpp"
#include "stochavg/graph.hpp"
#include "stochavg/noise.hpp"

namespace stochavg::engine {

using flows::GraphFlow;
using graph::Digraph;
using noise::IntensityField;
using noise::NoiseModel;

inline constexpr double kDivergenceLimit = 1e12;

struct SimConfig {
  std::vector<double> x0;
  GraphFlow flow;
  NoiseModel noise;
  IntensityField intensities;
  gain::GainSchedule gain;
  std::uint64_t horizon = 1000;
  std::uint64_t record_stride = 1;
  std::size_t trials = 1;
  std::uint64_t base_seed = 0;
  bool record_state = false;  // keep X at each sample, not only V and centroid

  std::size_t n() const noexcept { return x0.size(); }
  /// Throws DimensionMismatch / InvalidArgument on inconsistent parts.
  void validate() const;
};

/// One synchronous protocol step:
///   x_i' = x_i + c sum_j a_ij (x_j + f_ji(x_j - x_i) xi_ji - x_i),
/// with xi stacked as index i*n + j for channel (j -> i).
void step_agentwise(std::span<const double> x, const Digraph& g, double c, std::span<const double> xi,
                    const IntensityField& f, std::span<double> out);

struct TrialResult {
  std::vector<std::uint64_t> times;
  std::vector<double> v;         // sum_i (x_i - mean x)^2
  std::vector<double> centroid;
  std::vector<double> states;    // times.size() x n, when record_state
  std::vector<double> final_x;
  double final_centroid = 0.0;
  double final_v = 0.0;
  double delta_norm_sum = 0.0;   // sum_{k=0..K} ||delta(k)||
};

/// Sample times 0, s, 2s, ... plus the horizon itself.
std::vector<std::uint64_t> sample_times(std::uint64_t horizon, std::uint64_t stride);

/// Bit-for-bit reproducible in (cfg, trial). Throws NonFinite or Divergent
/// with the trial and step in the message.
TrialResult run_trial(const SimConfig& cfg, std::uint64_t trial);

struct EnsembleStats {
  std::size_t trials = 0;
  std::vector<std::uint64_t> times;
  std::vector<double> mean_v;
  std::vector<double> se_v;
  std::vector<double> final_centroids;  // per trial, in trial order
  std::vector<double> final_v;
  double mean_centroid = 0.0;
  double var_centroid = 0.0;  // sample variance, 0 for one trial
  double se_centroid = 0.0;
  double mean_final_v = 0.0;
  double max_final_v = 0.0;
  double mean_rate_end = 0.0;  // sqrt(c(K) K) (1/K) sum_k ||delta(k)||, averaged
};

struct EnsembleOptions {
  std::size_t threads = 0;  // 0: STOCHAVG_THREADS, else hardware concurrency
  std::size_t chunk = 64;   // trials per work unit
};

/// Trials are split into fixed chunks by index and merged in index order,
/// so the result does not depend on the thread count. When `kept` is given it
/// receives every TrialResult in trial order.
EnsembleStats run_ensemble(const SimConfig& cfg, const EnsembleOptions& opt = {},
                           std::vector<TrialResult>* kept = nullptr);

double rate_at_end(const TrialResult& t, const gain::GainSchedule& g, std::uint64_t horizon);

std::size_t thread_count(std::size_t requested);

}  // namespace stochavg::engine
