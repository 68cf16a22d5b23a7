#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stochavg/graph.hpp"
#include "stochavg/linalg.hpp"
#include "stochavg/rng.hpp"

namespace stochavg::flows {

using graph::Digraph;
using linalg::Matrix;

enum class FlowKind { Deterministic, Iid, Markov };

/// Flow classes for which consensus theorems are available:
/// Gamma1 conditionally balanced, Gamma2 uniformly ergodic Markov,
/// Gamma3 independent, Gamma4 i.i.d.
enum class FlowClass { Gamma1, Gamma2, Gamma3, Gamma4 };

const char* to_string(FlowKind k);
const char* to_string(FlowClass c);

inline constexpr double kProbabilityTol = 1e-12;

/// Random digraph sequence G(0), G(1), ... over a finite set of graphs.
class GraphFlow {
 public:
  /// G(k) = period[k mod period.size()].
  static GraphFlow deterministic(std::vector<Digraph> period);
  /// G(k) drawn independently from `support` with `probabilities`.
  static GraphFlow iid(std::vector<Digraph> support, std::vector<double> probabilities);
  /// G(0) ~ initial, G(k) ~ transition row of G(k-1).
  static GraphFlow markov(std::vector<Digraph> states, Matrix transition, std::vector<double> initial);
  /// i.i.d. link failures on a balanced base graph: each unordered pair {i, j}
  /// carrying an edge survives (both directions together) with probability p.
  static GraphFlow bernoulli_edge_failure(const Digraph& base, double p);

  FlowKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return graphs_.front().n(); }
  const std::vector<Digraph>& graphs() const noexcept { return graphs_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }
  const Matrix& transition() const noexcept { return transition_; }
  const std::vector<double>& initial() const noexcept { return initial_; }

  /// States with positive probability at some time (Markov); all graphs otherwise.
  std::vector<std::size_t> reachable_states() const;

  /// i.i.d. draw for a uniform u in [0, 1).
  std::size_t draw_iid(double u) const;

 private:
  GraphFlow() = default;

  FlowKind kind_ = FlowKind::Deterministic;
  std::vector<Digraph> graphs_;
  std::vector<double> probabilities_;
  Matrix transition_;
  std::vector<double> initial_;
  std::vector<double> cumulative_;  // running sums over positive probabilities
  std::vector<std::size_t> cumulative_index_;
};

/// Per-trial sampler position. `next_step` is the time index of the next draw.
struct SamplerState {
  std::uint64_t next_step = 0;
  std::size_t current = 0;  // index of the last drawn graph
  bool started = false;
};

/// Draws G(state.next_step) and advances the state. Returns an index into
/// flow.graphs(); `sample_graph` returns the graph itself.
std::size_t sample_index(const GraphFlow& flow, SamplerState& state, const rng::CounterStream& stream);
const Digraph& sample_graph(const GraphFlow& flow, SamplerState& state, const rng::CounterStream& stream);

/// E[A_{G(next)} | history summarised by state].
Matrix conditional_mean_adjacency(const GraphFlow& flow, const SamplerState& state);

/// Distinct distributions of the next graph over flow.graphs(), one per
/// reachable conditioning state.
std::vector<std::vector<double>> conditioning_laws(const GraphFlow& flow);

bool check_conditionally_balanced(const GraphFlow& flow, double tol = graph::kBalanceTol);

/// inf over window starts of lambda_2 of the summed conditional symmetrized
/// Laplacians over a window of length h.
double joint_connectivity_theta(const GraphFlow& flow, std::size_t h);

struct MomentConstants {
  double rho0 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho1_entry = 0.0;  // max_ij E[a_ij^2]
};

/// Exact suprema over conditioning states:
///   rho0 = (E ||L||^e)^(1/e) with e = 2^max(h,2),
///   rho1 = E[|E| max a_ij^2],
///   rho2 = max_i E[(row_i - col_i)^2],
///   rho1_entry = max_ij E[a_ij^2].
MomentConstants moment_constants(const GraphFlow& flow, std::size_t h);

/// Unconditional moments of G(0) used by the i.i.d. refinements.
struct IidMoments {
  double lambda2_mean = 0.0;  // lambda_2(E[sym L])
  double l2_moment = 0.0;     // E ||L||^2
  double rho1_bar = 0.0;      // E[|E| max a_ij^2]
  double rho2_bar = 0.0;      // max_i E[(row_i - col_i)^2]
  double rho1_entry = 0.0;    // max_ij E[a_ij^2]
  Matrix mean_adjacency;
};

IidMoments iid_moments(const GraphFlow& flow);

std::vector<double> stationary_distribution(const Matrix& p, double tol = linalg::kDefaultTol);

bool check_uniform_ergodicity(const Matrix& p, double tol = linalg::kDefaultTol);

struct FlowCertificate {
  FlowKind kind = FlowKind::Deterministic;
  bool conditionally_balanced = false;
  std::vector<FlowClass> classes;
  std::size_t h = 1;
  double theta = 0.0;
  bool b1_satisfied = false;  // theta > 0
  double rho0 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho1_entry = 0.0;
  std::optional<std::vector<double>> pi;
  std::optional<bool> uniformly_ergodic;
  /// Markov: sum_j pi_j L_j; i.i.d.: E[L]; deterministic: union over one period.
  std::optional<bool> mean_spanning_tree;
  double sup_sym_laplacian_norm = 0.0;
  std::optional<IidMoments> iid;

  bool member_of(FlowClass c) const;
};

FlowCertificate certify(const GraphFlow& flow, std::size_t h);

}  // namespace stochavg::flows
