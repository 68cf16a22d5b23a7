#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "stochavg/engine.hpp"
#include "stochavg/flows.hpp"
#include "stochavg/gain.hpp"

namespace stochavg::analysis {

struct BoundInputs {
  double sigma = 0.0;  // max sigma_ji
  double b = 0.0;      // max b_ji
  double beta = 0.0;
  double rho0 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::size_t n = 0;
  double v0 = 0.0;          // ||delta(0)||^2
  double x0_norm_sq = 0.0;  // ||X(0)||^2
  double c_sum = 0.0;       // sum c^2
  double c3_sum = 0.0;      // sum c^3
  // i.i.d. flows only
  std::optional<double> lambda2_mean;
  std::optional<double> l2_moment;
  std::optional<double> rho1_bar;
  std::optional<double> rho2_bar;
  // sup max_ij E[a_ij^2 | past], for the balanced-graph refinement
  std::optional<double> rho1_entry;
};

/// Additive-noise, multiplicative-noise and unbalance contributions.
struct BoundTerms {
  double additive = 0.0;
  double multiplicative = 0.0;
  double unbalance = 0.0;
  double total() const noexcept { return additive + multiplicative + unbalance; }
};

struct BoundReport {
  double q_v = 0.0;
  double q_x = 0.0;
  double var_bound_thm1 = 0.0;
  BoundTerms thm1_terms;
  std::optional<double> var_bound_remark6;
  std::optional<bool> small_gain_ok;
  std::optional<double> small_gain_limit;
  std::optional<double> c_tilde_thm4;
  std::optional<double> var_bound_thm4;
  std::optional<BoundTerms> thm4_terms;
};

/// q_v, q_x and the three-term variance bound with c~ replaced by q_v c.
/// Throws Overflow when an exponential leaves the double range.
BoundReport theorem1_variance_bound(const BoundInputs& in);

/// Two-term bound for instantaneously balanced graphs and independent noises.
/// Throws MissingInput without rho1_entry.
double remark6_variance_bound(const BoundInputs& in);

struct Theorem4Result {
  bool small_gain_ok = false;
  double small_gain_limit = 0.0;  // c(0) must be strictly below this
  std::optional<double> c_tilde;
  std::optional<double> var_bound;
  std::optional<BoundTerms> terms;
};

/// Throws MissingInput unless the i.i.d. fields are present.
Theorem4Result theorem4_bound(const BoundInputs& in, double c0);

/// Everything that applies to the inputs: Theorem 1 always, the balanced
/// refinement when rho1_entry is known, Theorem 4 when the i.i.d. fields are.
BoundReport full_report(const BoundInputs& in, double c0);

BoundInputs make_bound_inputs(const engine::SimConfig& cfg, const flows::FlowCertificate& cert);

/// r(n) = sqrt(c(n) n) (1/n) sum_{k<=n} ||delta(k)|| at every n of a stride-1
/// trial. Throws StrideTooCoarse otherwise.
std::vector<double> rate_functional(const engine::TrialResult& trial, const gain::GainSchedule& g);

/// Least-squares slope of log y against log x over the points with
/// x in [from, to] and y > 0.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double from, double to);

struct Interval {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double se = 0.0;
};

struct XStarEstimate {
  Interval mean;      // value +- 1.96 se
  Interval variance;  // sample variance +- 4 se, se from the fourth moment
};

/// Throws InsufficientTrials for fewer than two trials.
XStarEstimate empirical_var_xstar(const engine::EnsembleStats& stats);

/// sum_k E[V(k)] c(k)^2 over the recorded samples, each weighted by the
/// number of steps it stands for.
double empirical_c_tilde(const engine::EnsembleStats& stats, const gain::GainSchedule& g);

}  // namespace stochavg::analysis
