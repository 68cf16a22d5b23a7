#include "stochavg/flows.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "stochavg/error.hpp"

namespace stochavg::flows {

const char* to_string(FlowKind k) {
  switch (k) {
    case FlowKind::Deterministic: return "deterministic";
    case FlowKind::Iid: return "iid";
    case FlowKind::Markov: return "markov";
  }
  return "?";
}

const char* to_string(FlowClass c) {
  switch (c) {
    case FlowClass::Gamma1: return "Gamma1";
    case FlowClass::Gamma2: return "Gamma2";
    case FlowClass::Gamma3: return "Gamma3";
    case FlowClass::Gamma4: return "Gamma4";
  }
  return "?";
}

namespace {

void require_common_n(const std::vector<Digraph>& gs) {
  if (gs.empty()) throw Error(ErrorKind::InvalidArgument, "graph flow needs at least one graph");
  for (const auto& g : gs)
    if (g.n() != gs.front().n()) throw Error(ErrorKind::DimensionMismatch, "flow graphs differ in agent count");
}

void require_distribution(const std::vector<double>& p, std::size_t size, const char* what) {
  if (p.size() != size) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has " + std::to_string(p.size()) +
                                                  " entries, expected " + std::to_string(size));
  }
  double s = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorKind::NotStochastic, std::string(what) + " has a negative entry");
    s += v;
  }
  if (std::abs(s - 1.0) > kProbabilityTol) {
    throw Error(ErrorKind::NotStochastic, std::string(what) + " sums to " + std::to_string(s));
  }
}

void require_stochastic(const Matrix& p) {
  if (!p.square()) throw Error(ErrorKind::NotStochastic, "transition matrix must be square");
  linalg::require_finite(p);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0.0;
    for (double v : p.row(i)) {
      if (v < 0.0) throw Error(ErrorKind::NotStochastic, "negative transition probability in row " + std::to_string(i));
      s += v;
    }
    if (std::abs(s - 1.0) > kProbabilityTol) {
      throw Error(ErrorKind::NotStochastic, "row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
  }
}

std::size_t draw_categorical(std::span<const double> p, double u) {
  double cum = 0.0;
  std::size_t last = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) continue;
    last = j;
    cum += p[j];
    if (u < cum) return j;
  }
  return last;
}

Matrix mixture(const std::vector<Digraph>& gs, std::span<const double> w) {
  Matrix m(gs.front().n(), gs.front().n());
  for (std::size_t j = 0; j < gs.size(); ++j)
    if (w[j] != 0.0) m += gs[j].adjacency() * w[j];
  return m;
}

// Boolean reachability closure of the support pattern of p (entries > tol).
std::vector<std::vector<char>> reachability(const Matrix& p, double tol) {
  const std::size_t n = p.rows();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    reach[s][s] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j)
        if (p(i, j) > tol && !reach[s][j]) {
          reach[s][j] = 1;
          stack.push_back(j);
        }
    }
  }
  return reach;
}

std::size_t closed_class_count(const Matrix& p, double tol) {
  const auto reach = reachability(p, tol);
  const std::size_t n = p.rows();
  std::size_t count = 0;
  std::vector<char> assigned(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    bool closed = true;
    for (std::size_t j = 0; j < n; ++j) {
      const bool same = reach[i][j] && reach[j][i];
      if (same) assigned[j] = 1;
      if (reach[i][j] && !reach[j][i]) closed = false;
    }
    if (closed) ++count;
  }
  return count;
}

std::vector<double> solve_dense(Matrix a, std::vector<double> rhs) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw Error(ErrorKind::NoUniqueStationary, "singular stationary system");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      std::swap(rhs[col], rhs[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = rhs[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a(r, c) * x[c];
    x[r] = s / a(r, r);
  }
  return x;
}

std::vector<double> row_times(std::span<const double> v, const Matrix& p) {
  std::vector<double> out(p.cols(), 0.0);
  for (std::size_t i = 0; i < p.rows(); ++i)
    if (v[i] != 0.0)
      for (std::size_t j = 0; j < p.cols(); ++j) out[j] += v[i] * p(i, j);
  return out;
}

double second_eigenvalue(const Matrix& m) { return linalg::sym_eigenvalues(m)[1]; }

// Sum over a window of conditional symmetrized Laplacians, given the law of
// each graph in the window.
double window_lambda2(const std::vector<Matrix>& sym_laplacians, const std::vector<std::vector<double>>& laws) {
  const std::size_t n = sym_laplacians.front().rows();
  Matrix sum(n, n);
  for (const auto& law : laws)
    for (std::size_t j = 0; j < law.size(); ++j)
      if (law[j] != 0.0) sum += sym_laplacians[j] * law[j];
  return second_eigenvalue(sum);
}

// States with positive probability at t = mh - 1 for some m >= 1. The sets
// at those times follow A_{m+1} = step^h(A_m), so iterate until one repeats.
std::vector<std::size_t> window_start_states(const GraphFlow& flow, std::size_t h) {
  const Matrix& p = flow.transition();
  const std::size_t m = p.rows();
  auto step = [&](const std::vector<char>& a) {
    std::vector<char> b(m, 0);
    for (std::size_t i = 0; i < m; ++i)
      if (a[i])
        for (std::size_t j = 0; j < m; ++j)
          if (p(i, j) > 0.0) b[j] = 1;
    return b;
  };
  std::vector<char> a(m, 0);
  for (std::size_t i = 0; i < m; ++i) a[i] = flow.initial()[i] > 0.0;
  for (std::size_t t = 1; t < h; ++t) a = step(a);
  std::vector<std::vector<char>> seen;
  std::vector<char> all(m, 0);
  while (std::find(seen.begin(), seen.end(), a) == seen.end()) {
    for (std::size_t i = 0; i < m; ++i) all[i] |= a[i];
    seen.push_back(a);
    for (std::size_t t = 0; t < h; ++t) a = step(a);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m; ++i)
    if (all[i]) out.push_back(i);
  return out;
}

std::vector<Matrix> sym_laplacians_of(const GraphFlow& flow) {
  std::vector<Matrix> out;
  out.reserve(flow.graphs().size());
  for (const auto& g : flow.graphs()) out.push_back(graph::symmetrized_laplacian(graph::laplacian(g)));
  return out;
}

struct GraphStats {
  double laplacian_norm = 0.0;
  double edges_max_sq = 0.0;
  std::vector<double> imbalance_sq;
  std::vector<double> entries_sq;
};

GraphStats stats_of(const Digraph& g) {
  GraphStats s;
  s.laplacian_norm = linalg::spectral_norm(graph::laplacian(g).matrix);
  const double max_abs = g.adjacency().max_abs();
  s.edges_max_sq = static_cast<double>(g.edge_count()) * max_abs * max_abs;
  s.entries_sq.reserve(g.adjacency().data().size());
  for (double a : g.adjacency().data()) s.entries_sq.push_back(a * a);
  s.imbalance_sq.resize(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double d = g.in_degree(i) - g.out_degree(i);
    s.imbalance_sq[i] = d * d;
  }
  return s;
}

}  // namespace

GraphFlow GraphFlow::deterministic(std::vector<Digraph> period) {
  require_common_n(period);
  GraphFlow f;
  f.kind_ = FlowKind::Deterministic;
  f.graphs_ = std::move(period);
  return f;
}

GraphFlow GraphFlow::iid(std::vector<Digraph> support, std::vector<double> probabilities) {
  require_common_n(support);
  require_distribution(probabilities, support.size(), "probabilities");
  GraphFlow f;
  f.kind_ = FlowKind::Iid;
  f.graphs_ = std::move(support);
  f.probabilities_ = std::move(probabilities);
  double cum = 0.0;
  for (std::size_t j = 0; j < f.probabilities_.size(); ++j) {
    if (f.probabilities_[j] <= 0.0) continue;
    cum += f.probabilities_[j];
    f.cumulative_.push_back(cum);
    f.cumulative_index_.push_back(j);
  }
  return f;
}

GraphFlow GraphFlow::markov(std::vector<Digraph> states, Matrix transition, std::vector<double> initial) {
  require_common_n(states);
  require_stochastic(transition);
  if (transition.rows() != states.size()) {
    throw Error(ErrorKind::DimensionMismatch, "transition matrix size differs from the number of states");
  }
  require_distribution(initial, states.size(), "initial distribution");
  GraphFlow f;
  f.kind_ = FlowKind::Markov;
  f.graphs_ = std::move(states);
  f.transition_ = std::move(transition);
  f.initial_ = std::move(initial);
  return f;
}

GraphFlow GraphFlow::bernoulli_edge_failure(const Digraph& base, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "survival probability outside [0, 1]");
  const std::size_t n = base.n();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (base.weight(i, j) != 0.0 || base.weight(j, i) != 0.0) pairs.emplace_back(i, j);
  constexpr std::size_t kMaxPairs = 14;
  if (pairs.size() > kMaxPairs) {
    throw Error(ErrorKind::InvalidArgument, "edge-failure flow supports at most " + std::to_string(kMaxPairs) +
                                                " linked pairs (got " + std::to_string(pairs.size()) + ")");
  }
  std::vector<Digraph> support;
  std::vector<double> probs;
  const std::size_t m = pairs.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    const int alive = std::popcount(mask);
    const double prob = std::pow(p, alive) * std::pow(1.0 - p, static_cast<int>(m) - alive);
    if (prob == 0.0) continue;
    Matrix a(n, n);
    for (std::size_t e = 0; e < m; ++e) {
      if (!(mask >> e & 1u)) continue;
      const auto [i, j] = pairs[e];
      a(i, j) = base.weight(i, j);
      a(j, i) = base.weight(j, i);
    }
    support.emplace_back(std::move(a));
    probs.push_back(prob);
  }
  // Renormalise away the rounding in the products.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& v : probs) v /= total;
  return iid(std::move(support), std::move(probs));
}

std::size_t GraphFlow::draw_iid(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return it == cumulative_.end() ? cumulative_index_.back() : cumulative_index_[it - cumulative_.begin()];
}

std::vector<std::size_t> GraphFlow::reachable_states() const {
  std::vector<std::size_t> out;
  if (kind_ != FlowKind::Markov) {
    out.resize(graphs_.size());
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  const auto reach = reachability(transition_, 0.0);
  std::vector<char> hit(graphs_.size(), 0);
  for (std::size_t s = 0; s < graphs_.size(); ++s)
    if (initial_[s] > 0.0)
      for (std::size_t j = 0; j < graphs_.size(); ++j)
        if (reach[s][j]) hit[j] = 1;
  for (std::size_t j = 0; j < hit.size(); ++j)
    if (hit[j]) out.push_back(j);
  return out;
}

std::size_t sample_index(const GraphFlow& flow, SamplerState& state, const rng::CounterStream& stream) {
  const std::uint64_t k = state.next_step;
  std::size_t idx = 0;
  switch (flow.kind()) {
    case FlowKind::Deterministic:
      idx = static_cast<std::size_t>(k % flow.graphs().size());
      break;
    case FlowKind::Iid:
      idx = flow.draw_iid(stream.uniform(k));
      break;
    case FlowKind::Markov:
      idx = state.started ? draw_categorical(flow.transition().row(state.current), stream.uniform(k))
                          : draw_categorical(flow.initial(), stream.uniform(k));
      break;
  }
  state.current = idx;
  state.started = true;
  state.next_step = k + 1;
  return idx;
}

const Digraph& sample_graph(const GraphFlow& flow, SamplerState& state, const rng::CounterStream& stream) {
  return flow.graphs()[sample_index(flow, state, stream)];
}

Matrix conditional_mean_adjacency(const GraphFlow& flow, const SamplerState& state) {
  switch (flow.kind()) {
    case FlowKind::Deterministic:
      return flow.graphs()[state.next_step % flow.graphs().size()].adjacency();
    case FlowKind::Iid:
      return mixture(flow.graphs(), flow.probabilities());
    case FlowKind::Markov:
      return state.started ? mixture(flow.graphs(), flow.transition().row(state.current))
                           : mixture(flow.graphs(), flow.initial());
  }
  return {};
}

std::vector<std::vector<double>> conditioning_laws(const GraphFlow& flow) {
  const std::size_t m = flow.graphs().size();
  std::vector<std::vector<double>> laws;
  switch (flow.kind()) {
    case FlowKind::Deterministic:
      for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> e(m, 0.0);
        e[k] = 1.0;
        laws.push_back(std::move(e));
      }
      break;
    case FlowKind::Iid:
      laws.push_back(flow.probabilities());
      break;
    case FlowKind::Markov:
      laws.push_back(flow.initial());
      for (std::size_t s : flow.reachable_states()) {
        const auto row = flow.transition().row(s);
        laws.emplace_back(row.begin(), row.end());
      }
      break;
  }
  return laws;
}

bool check_conditionally_balanced(const GraphFlow& flow, double tol) {
  for (const auto& law : conditioning_laws(flow)) {
    const Matrix mean = mixture(flow.graphs(), law);
    for (double v : mean.data())
      if (v < -tol) return false;
    if (!graph::is_balanced(Digraph(mean), tol)) return false;
  }
  return true;
}

double joint_connectivity_theta(const GraphFlow& flow, std::size_t h) {
  if (h == 0) throw Error(ErrorKind::InvalidArgument, "window length h must be >= 1");
  if (flow.n() < 2) throw Error(ErrorKind::DimensionMismatch, "joint connectivity needs n >= 2");
  const auto sym = sym_laplacians_of(flow);
  const std::size_t m = flow.graphs().size();
  switch (flow.kind()) {
    case FlowKind::Iid:
      return window_lambda2(sym, std::vector<std::vector<double>>(h, flow.probabilities()));
    case FlowKind::Deterministic: {
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t start = 0; start < m; ++start) {
        std::vector<std::vector<double>> laws;
        for (std::size_t i = 0; i < h; ++i) {
          std::vector<double> e(m, 0.0);
          e[(start * h + i) % m] = 1.0;
          laws.push_back(std::move(e));
        }
        theta = std::min(theta, window_lambda2(sym, laws));
      }
      return theta;
    }
    case FlowKind::Markov: {
      const Matrix& p = flow.transition();
      // First window: laws of G(0..h-1) from the initial distribution.
      std::vector<std::vector<double>> laws;
      std::vector<double> law = flow.initial();
      for (std::size_t i = 0; i < h; ++i) {
        laws.push_back(law);
        law = row_times(law, p);
      }
      double theta = window_lambda2(sym, laws);
      // Later windows: conditioned on G(mh - 1) for m >= 1.
      for (std::size_t s : window_start_states(flow, h)) {
        laws.clear();
        std::vector<double> cur(m, 0.0);
        cur[s] = 1.0;
        for (std::size_t i = 0; i < h; ++i) {
          cur = row_times(cur, p);
          laws.push_back(cur);
        }
        theta = std::min(theta, window_lambda2(sym, laws));
      }
      return theta;
    }
  }
  return 0.0;
}

MomentConstants moment_constants(const GraphFlow& flow, std::size_t h) {
  if (h == 0) throw Error(ErrorKind::InvalidArgument, "window length h must be >= 1");
  std::vector<GraphStats> stats;
  stats.reserve(flow.graphs().size());
  for (const auto& g : flow.graphs()) stats.push_back(stats_of(g));
  const double expo = std::ldexp(1.0, static_cast<int>(std::max<std::size_t>(h, 2)));
  const std::size_t n = flow.n();

  MomentConstants out;
  for (const auto& law : conditioning_laws(flow)) {
    double top = 0.0;
    for (std::size_t j = 0; j < law.size(); ++j)
      if (law[j] > 0.0) top = std::max(top, stats[j].laplacian_norm);
    double rho0 = 0.0;
    if (top > 0.0) {
      double acc = 0.0;
      for (std::size_t j = 0; j < law.size(); ++j)
        if (law[j] > 0.0) acc += law[j] * std::pow(stats[j].laplacian_norm / top, expo);
      rho0 = top * std::pow(acc, 1.0 / expo);
    }
    double rho1 = 0.0;
    for (std::size_t j = 0; j < law.size(); ++j) rho1 += law[j] * stats[j].edges_max_sq;
    double rho2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (std::size_t j = 0; j < law.size(); ++j) e += law[j] * stats[j].imbalance_sq[i];
      rho2 = std::max(rho2, e);
    }
    double entry = 0.0;
    for (std::size_t q = 0; q < n * n; ++q) {
      double e = 0.0;
      for (std::size_t j = 0; j < law.size(); ++j) e += law[j] * stats[j].entries_sq[q];
      entry = std::max(entry, e);
    }
    out.rho0 = std::max(out.rho0, rho0);
    out.rho1_entry = std::max(out.rho1_entry, entry);
    out.rho1 = std::max(out.rho1, rho1);
    out.rho2 = std::max(out.rho2, rho2);
  }
  return out;
}

IidMoments iid_moments(const GraphFlow& flow) {
  std::vector<double> law;
  if (flow.kind() == FlowKind::Iid) {
    law = flow.probabilities();
  } else if (flow.kind() == FlowKind::Deterministic && flow.graphs().size() == 1) {
    law = {1.0};
  } else {
    throw Error(ErrorKind::InvalidArgument, "i.i.d. moments need an i.i.d. or constant flow");
  }
  const std::size_t n = flow.n();
  IidMoments m;
  m.mean_adjacency = mixture(flow.graphs(), law);
  m.lambda2_mean = second_eigenvalue(graph::symmetrized_laplacian(graph::laplacian(Digraph(m.mean_adjacency))));
  Matrix second(n, n);
  for (std::size_t j = 0; j < law.size(); ++j) {
    if (law[j] == 0.0) continue;
    const auto s = stats_of(flow.graphs()[j]);
    m.l2_moment += law[j] * s.laplacian_norm * s.laplacian_norm;
    m.rho1_bar += law[j] * s.edges_max_sq;
    const auto a = flow.graphs()[j].adjacency().data();
    for (std::size_t k = 0; k < a.size(); ++k) second.data()[k] += law[j] * a[k] * a[k];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < law.size(); ++j) {
      const double d = flow.graphs()[j].in_degree(i) - flow.graphs()[j].out_degree(i);
      e += law[j] * d * d;
    }
    m.rho2_bar = std::max(m.rho2_bar, e);
  }
  m.rho1_entry = second.max_abs();
  return m;
}

std::vector<double> stationary_distribution(const Matrix& p, double tol) {
  require_stochastic(p);
  const std::size_t n = p.rows();
  if (closed_class_count(p, 0.0) != 1) {
    throw Error(ErrorKind::NoUniqueStationary, "chain has more than one closed class");
  }
  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Matrix a = p.transpose() - Matrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) a(n - 1, c) = 1.0;
  std::vector<double> rhs(n, 0.0);
  rhs[n - 1] = 1.0;
  auto pi = solve_dense(std::move(a), std::move(rhs));
  for (double& v : pi) v = std::max(v, 0.0);
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= total;
  const auto next = row_times(pi, p);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) residual += (next[i] - pi[i]) * (next[i] - pi[i]);
  if (std::sqrt(residual) > tol) {
    throw Error(ErrorKind::NoUniqueStationary, "stationary residual " + std::to_string(std::sqrt(residual)));
  }
  return pi;
}

bool check_uniform_ergodicity(const Matrix& p, double tol) {
  require_stochastic(p);
  const std::size_t n = p.rows();
  std::vector<char> base(n * n), power(n * n), next(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) base[i * n + j] = p(i, j) > tol;
  power = base;
  // A finite chain is irreducible and aperiodic iff some power of its
  // pattern is strictly positive; the exponent never needs to exceed n^2+1.
  for (std::size_t m = 1; m <= n * n + 1; ++m) {
    if (std::all_of(power.begin(), power.end(), [](char c) { return c != 0; })) return true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        char v = 0;
        for (std::size_t k = 0; k < n && !v; ++k) v = power[i * n + k] && base[k * n + j];
        next[i * n + j] = v;
      }
    power.swap(next);
  }
  return false;
}

bool FlowCertificate::member_of(FlowClass c) const {
  return std::find(classes.begin(), classes.end(), c) != classes.end();
}

FlowCertificate certify(const GraphFlow& flow, std::size_t h) {
  FlowCertificate cert;
  cert.kind = flow.kind();
  cert.h = h;
  cert.conditionally_balanced = check_conditionally_balanced(flow);
  cert.theta = joint_connectivity_theta(flow, h);
  cert.b1_satisfied = cert.theta > linalg::kDefaultTol;
  const auto mc = moment_constants(flow, h);
  cert.rho0 = mc.rho0;
  cert.rho1 = mc.rho1;
  cert.rho2 = mc.rho2;
  cert.rho1_entry = mc.rho1_entry;
  for (const auto& g : flow.graphs()) {
    cert.sup_sym_laplacian_norm =
        std::max(cert.sup_sym_laplacian_norm, linalg::spectral_norm(graph::symmetrized_laplacian(graph::laplacian(g))));
  }
  if (cert.conditionally_balanced) cert.classes.push_back(FlowClass::Gamma1);

  auto spanning = [](const Matrix& adjacency) -> std::optional<bool> {
    try {
      return graph::has_spanning_tree(graph::laplacian(Digraph(adjacency)));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NegativeWeights) return std::nullopt;
      throw;
    }
  };

  switch (flow.kind()) {
    case FlowKind::Markov: {
      cert.uniformly_ergodic = check_uniform_ergodicity(flow.transition());
      try {
        cert.pi = stationary_distribution(flow.transition());
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoUniqueStationary) throw;
      }
      if (cert.pi) cert.mean_spanning_tree = spanning(mixture(flow.graphs(), *cert.pi));
      if (cert.conditionally_balanced && *cert.uniformly_ergodic && cert.pi) cert.classes.push_back(FlowClass::Gamma2);
      break;
    }
    case FlowKind::Iid: {
      cert.iid = iid_moments(flow);
      cert.mean_spanning_tree = spanning(cert.iid->mean_adjacency);
      if (cert.conditionally_balanced) {
        cert.classes.push_back(FlowClass::Gamma3);
        cert.classes.push_back(FlowClass::Gamma4);
      }
      break;
    }
    case FlowKind::Deterministic: {
      const std::vector<double> ones(flow.graphs().size(), 1.0);
      cert.mean_spanning_tree = spanning(mixture(flow.graphs(), ones));
      if (cert.conditionally_balanced) cert.classes.push_back(FlowClass::Gamma3);
      if (flow.graphs().size() == 1) {
        cert.iid = iid_moments(flow);
        if (cert.conditionally_balanced) cert.classes.push_back(FlowClass::Gamma4);
      }
      break;
    }
  }
  return cert;
}

}  // namespace stochavg::flows
