#include "stochavg/analysis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stochavg/error.hpp"

namespace stochavg::analysis {

namespace {

double checked_exp(double arg, const char* what) {
  if (!(arg < std::log(std::numeric_limits<double>::max()))) {
    throw Error(ErrorKind::Overflow, std::string(what) + ": exponent " + std::to_string(arg) + " overflows");
  }
  return std::exp(arg);
}

void require_inputs(const BoundInputs& in) {
  const double v[] = {in.sigma, in.b, in.beta, in.rho0, in.rho1, in.rho2, in.v0, in.x0_norm_sq, in.c_sum, in.c3_sum};
  for (double x : v)
    if (!(std::isfinite(x) && x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bound inputs must be finite and >= 0");
  if (in.n == 0) throw Error(ErrorKind::InvalidArgument, "bound inputs need n >= 1");
}

BoundTerms three_terms(const BoundInputs& in, double rho1, double rho2, double c_tilde, double q_x) {
  const double nn = static_cast<double>(in.n);
  BoundTerms t;
  t.additive = 4.0 * in.c_sum * in.beta * in.b * in.b * rho1 / (nn * nn);
  t.multiplicative = 8.0 * c_tilde * in.beta * in.sigma * in.sigma * rho1 / (nn * nn);
  t.unbalance = 2.0 * in.c_sum * rho2 * q_x / nn;
  return t;
}

}  // namespace

BoundReport theorem1_variance_bound(const BoundInputs& in) {
  require_inputs(in);
  const double c = in.c_sum;
  BoundReport r;
  r.q_v = checked_exp(c * (in.rho0 * in.rho0 + 4.0 * in.rho1 * in.beta * in.sigma * in.sigma), "q_v") *
          (in.v0 + 2.0 * c * in.beta * in.rho1 * in.b * in.b);
  r.q_x = checked_exp(c * in.rho0 * in.rho0, "q_x") *
          (in.x0_norm_sq + 2.0 * c * in.beta * in.rho1 * (2.0 * in.sigma * in.sigma * r.q_v + in.b * in.b));
  r.thm1_terms = three_terms(in, in.rho1, in.rho2, r.q_v * c, r.q_x);
  r.var_bound_thm1 = r.thm1_terms.total();
  if (!std::isfinite(r.var_bound_thm1)) throw Error(ErrorKind::Overflow, "variance bound overflows");
  return r;
}

double remark6_variance_bound(const BoundInputs& in) {
  if (!in.rho1_entry) throw Error(ErrorKind::MissingInput, "balanced-graph bound needs rho1_entry");
  const auto base = theorem1_variance_bound(in);
  const auto t = three_terms(in, *in.rho1_entry, 0.0, base.q_v * in.c_sum, base.q_x);
  return t.additive + t.multiplicative;
}

Theorem4Result theorem4_bound(const BoundInputs& in, double c0) {
  if (!in.lambda2_mean || !in.l2_moment || !in.rho1_bar || !in.rho2_bar) {
    throw Error(ErrorKind::MissingInput, "i.i.d. bound needs lambda2_mean, l2_moment, rho1_bar and rho2_bar");
  }
  const double slope = *in.l2_moment + 4.0 * in.sigma * in.sigma * in.beta * *in.rho1_bar;
  Theorem4Result r;
  r.small_gain_limit = slope > 0.0 ? 2.0 * *in.lambda2_mean / slope : std::numeric_limits<double>::infinity();
  r.small_gain_ok = *in.lambda2_mean > 0.0 && c0 < r.small_gain_limit;
  if (!r.small_gain_ok) return r;
  const auto base = theorem1_variance_bound(in);
  const double denom = 2.0 * *in.lambda2_mean - slope * c0;
  r.c_tilde = (c0 * in.v0 + 2.0 * in.b * in.b * in.beta * *in.rho1_bar * in.c3_sum) / denom;
  r.terms = three_terms(in, *in.rho1_bar, *in.rho2_bar, *r.c_tilde, base.q_x);
  r.var_bound = r.terms->total();
  return r;
}

BoundReport full_report(const BoundInputs& in, double c0) {
  BoundReport r = theorem1_variance_bound(in);
  if (in.rho1_entry) r.var_bound_remark6 = remark6_variance_bound(in);
  if (in.lambda2_mean && in.l2_moment && in.rho1_bar && in.rho2_bar) {
    const auto t4 = theorem4_bound(in, c0);
    r.small_gain_ok = t4.small_gain_ok;
    r.small_gain_limit = t4.small_gain_limit;
    r.c_tilde_thm4 = t4.c_tilde;
    r.var_bound_thm4 = t4.var_bound;
    r.thm4_terms = t4.terms;
  }
  return r;
}

BoundInputs make_bound_inputs(const engine::SimConfig& cfg, const flows::FlowCertificate& cert) {
  BoundInputs in;
  in.sigma = cfg.intensities.max_sigma();
  in.b = cfg.intensities.max_b();
  in.beta = cfg.noise.beta();
  in.rho0 = cert.rho0;
  in.rho1 = cert.rho1;
  in.rho2 = cert.rho2;
  in.n = cfg.n();
  double mean = 0.0;
  for (double v : cfg.x0) {
    mean += v;
    in.x0_norm_sq += v * v;
  }
  mean /= static_cast<double>(cfg.n());
  for (double v : cfg.x0) in.v0 += (v - mean) * (v - mean);
  in.c_sum = gain::sum_c_squared(cfg.gain).value;
  in.c3_sum = gain::sum_c_cubed(cfg.gain).value;
  in.rho1_entry = cert.rho1_entry;
  if (cert.iid) {
    in.lambda2_mean = cert.iid->lambda2_mean;
    in.l2_moment = cert.iid->l2_moment;
    in.rho1_bar = cert.iid->rho1_bar;
    in.rho2_bar = cert.iid->rho2_bar;
  }
  return in;
}

std::vector<double> rate_functional(const engine::TrialResult& trial, const gain::GainSchedule& g) {
  for (std::size_t s = 0; s < trial.times.size(); ++s) {
    if (trial.times[s] != s) throw Error(ErrorKind::StrideTooCoarse, "rate functional needs a stride-1 trajectory");
  }
  std::vector<double> r(trial.v.size(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < trial.v.size(); ++k) {
    sum += std::sqrt(trial.v[k]);
    if (k == 0) continue;
    const double n = static_cast<double>(k);
    r[k] = std::sqrt(g(k) * n) * sum / n;
  }
  return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double from, double to) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, m = 0.0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] < from || x[i] > to || !(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    m += 1.0;
  }
  const double den = m * sxx - sx * sx;
  if (m < 2.0 || den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / den;
}

XStarEstimate empirical_var_xstar(const engine::EnsembleStats& stats) {
  const std::size_t m = stats.final_centroids.size();
  if (m < 2) throw Error(ErrorKind::InsufficientTrials, "variance of x* needs at least two trials");
  const double md = static_cast<double>(m);
  double mean = 0.0;
  for (double v : stats.final_centroids) mean += v;
  mean /= md;
  double m2 = 0.0, m4 = 0.0;
  for (double v : stats.final_centroids) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  XStarEstimate e;
  const double var = m2 / (md - 1.0);
  e.mean.value = mean;
  e.mean.se = std::sqrt(var / md);
  e.mean.lo = mean - 1.96 * e.mean.se;
  e.mean.hi = mean + 1.96 * e.mean.se;
  const double pop2 = m2 / md;
  e.variance.value = var;
  e.variance.se = std::sqrt(std::max(0.0, m4 / md - pop2 * pop2) / md);
  e.variance.lo = std::max(0.0, var - 4.0 * e.variance.se);
  e.variance.hi = var + 4.0 * e.variance.se;
  return e;
}

double empirical_c_tilde(const engine::EnsembleStats& stats, const gain::GainSchedule& g) {
  double acc = 0.0;
  for (std::size_t s = 0; s < stats.times.size(); ++s) {
    const std::uint64_t t = stats.times[s];
    const std::uint64_t end = s + 1 < stats.times.size() ? stats.times[s + 1] : t + 1;
    for (std::uint64_t k = t; k < end; ++k) acc += stats.mean_v[s] * g(k) * g(k);
  }
  return acc;
}

}  // namespace stochavg::analysis
