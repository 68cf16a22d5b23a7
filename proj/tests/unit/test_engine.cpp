#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stochavg/engine.hpp"
#include "stochavg/error.hpp"

using namespace stochavg;
using engine::SimConfig;
using flows::GraphFlow;
using graph::Digraph;
using linalg::Matrix;
using noise::IntensityField;
using noise::IntensityFunction;
using noise::NoiseModel;

namespace {

SimConfig make_config(std::vector<double> x0, GraphFlow flow, double std_dev, double sigma, double b) {
  const std::size_t n = x0.size();
  return SimConfig{.x0 = std::move(x0),
                   .flow = std::move(flow),
                   .noise = NoiseModel::iid_gaussian(n, std_dev),
                   .intensities = IntensityField(n, IntensityFunction::affine(sigma, b)),
                   .gain = {}};
}

std::vector<double> linear_x0(std::size_t n) {
  std::vector<double> x(n);
  std::iota(x.begin(), x.end(), 0.0);
  return x;
}

double rel_err(double a, double b, double scale) { return std::abs(a - b) / (1.0 + scale); }

}  // namespace

TEST_CASE("step examples") {
  const std::vector<double> x{0.5, -1.0, 4.0};
  const IntensityField f(3, IntensityFunction::affine(0.3, 0.2));
  std::vector<double> xi(9, 1.7), out(3);
  engine::step_agentwise(x, graph::complete_graph(3), 0.0, xi, f, out);
  CHECK(out == x);
  engine::step_agentwise(x, graph::empty_graph(3), 0.8, xi, f, out);
  CHECK(out == x);

  const std::vector<double> x2{0, 2};
  std::vector<double> out2(2), zero(4, 0.0);
  engine::step_agentwise(x2, Digraph(Matrix{{0, 1}, {1, 0}}), 0.5, zero, IntensityField(2, IntensityFunction::affine(1, 1)),
                         out2);
  CHECK(out2[0] == 1.0);
  CHECK(out2[1] == 1.0);

  std::vector<double> short_xi(4);
  CHECK(oracle::thrown_kind([&] { engine::step_agentwise(x, graph::complete_graph(3), 0.1, short_xi, f, out); }) ==
        ErrorKind::DimensionMismatch);
  const std::vector<double> huge{1e308, -1e308, 0};
  CHECK(oracle::thrown_kind([&] { engine::step_agentwise(huge, graph::complete_graph(3), 1.0, xi, f, out); }) ==
        ErrorKind::NonFinite);
}

TEST_CASE("agentwise step equals the compact closed-loop form") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(t % 6);
    const Digraph g = oracle::random_digraph(rng, n, 0.6, -0.5, 2.0);
    IntensityField f(n, IntensityFunction::affine(u(rng), u(rng)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double r = u(rng);
        if (r < 0.3) f.set(j, i, IntensityFunction::affine(u(rng), u(rng)));
        if (t % 3 == 0 && r > 0.9) {
          const double s = u(rng);
          f.set(j, i, IntensityFunction::custom([s](double d) { return s * std::tanh(d) + 0.1; }, s, 0.1));
        }
      }
    std::vector<double> x(n), xi(n * n), out(n);
    for (auto& v : x) v = 5 * z(rng);
    for (auto& v : xi) v = z(rng);
    const double c = u(rng);
    engine::step_agentwise(x, g, c, xi, f, out);
    const auto want = oracle::step_compact(x, g, c, xi, f);
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    scale *= 1.0 + 2.0 * n;
    for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(out[i], want[i], scale) <= 1e-12);
  }
}

TEST_CASE("balanced graphs conserve the centroid when f is zero") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> z;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 7);
    const Matrix a = oracle::random_digraph(rng, n, 0.5, 0.1, 2.0).adjacency();
    const Digraph g(a + a.transpose());
    std::vector<double> x(n), xi(n * n), out(n);
    for (auto& v : x) v = z(rng);
    for (auto& v : xi) v = z(rng);
    engine::step_agentwise(x, g, 0.05, xi, IntensityField(n, IntensityFunction::affine(0, 0)), out);
    const double before = std::accumulate(x.begin(), x.end(), 0.0);
    const double after = std::accumulate(out.begin(), out.end(), 0.0);
    CHECK(after == doctest::Approx(before).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("step is permutation equivariant") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 6);
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::shuffle(p.begin(), p.end(), rng);
    const Digraph g = oracle::random_digraph(rng, n, 0.6, 0.1, 2.0);
    IntensityField f(n, IntensityFunction::affine(0.2, 0.1));
    IntensityField fp(n, IntensityFunction::affine(0.2, 0.1));
    Matrix ap(n, n);
    std::vector<double> x(n), xp(n), xi(n * n), xip(n * n), out(n), outp(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = z(rng);
    for (auto& v : xi) v = z(rng);
    for (std::size_t i = 0; i < n; ++i) {
      xp[p[i]] = x[i];
      for (std::size_t j = 0; j < n; ++j) {
        ap(p[i], p[j]) = g.weight(i, j);
        xip[p[i] * n + p[j]] = xi[i * n + j];
        if (u(rng) < 0.3) {
          const double s = u(rng), b = u(rng);
          f.set(j, i, IntensityFunction::affine(s, b));
          fp.set(p[j], p[i], IntensityFunction::affine(s, b));
        }
      }
    }
    engine::step_agentwise(x, g, 0.3, xi, f, out);
    engine::step_agentwise(xp, Digraph(ap), 0.3, xip, fp, outp);
    for (std::size_t i = 0; i < n; ++i) CHECK(outp[p[i]] == doctest::Approx(out[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("sample times") {
  CHECK(engine::sample_times(10, 3) == std::vector<std::uint64_t>{0, 3, 6, 9, 10});
  CHECK(engine::sample_times(9, 3) == std::vector<std::uint64_t>{0, 3, 6, 9});
  CHECK(engine::sample_times(0, 5) == std::vector<std::uint64_t>{0});
  CHECK(oracle::thrown_kind([] { engine::sample_times(5, 0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("run trial contracts") {
  auto cfg = make_config({0.0, 1.0, 3.0, -2.0}, GraphFlow::bernoulli_edge_failure(graph::complete_graph(4), 0.6), 0.3,
                         0.1, 0.1);
  cfg.horizon = 300;
  cfg.record_stride = 7;
  cfg.record_state = true;
  const auto a = engine::run_trial(cfg, 5);
  const auto b = engine::run_trial(cfg, 5);
  CHECK(a.v == b.v);
  CHECK(a.centroid == b.centroid);
  CHECK(a.states == b.states);
  CHECK(a.final_x == b.final_x);
  CHECK(a.delta_norm_sum == b.delta_norm_sum);
  CHECK(engine::run_trial(cfg, 6).final_x != a.final_x);
  CHECK(a.times.size() == engine::sample_times(300, 7).size());
  CHECK(a.states.size() == a.times.size() * 4);
  CHECK(a.v.back() == a.final_v);
  CHECK(std::equal(a.final_x.begin(), a.final_x.end(), a.states.end() - 4));

  cfg.horizon = 0;
  cfg.record_stride = 1;
  const auto z = engine::run_trial(cfg, 0);
  CHECK(z.times == std::vector<std::uint64_t>{0});
  // mean 0.5: deviations -0.5, 0.5, 2.5, -2.5
  CHECK(z.v[0] == doctest::Approx(13.0).epsilon(1e-15));
  CHECK(z.final_x == cfg.x0);

  auto clean = make_config(linear_x0(5), GraphFlow::deterministic({graph::complete_graph(5)}), 0.0, 0.0, 0.0);
  clean.horizon = 2000;
  CHECK(engine::run_trial(clean, 0).final_v < 1e-6);

  auto bad = make_config(linear_x0(3), GraphFlow::deterministic({graph::complete_graph(4)}), 0.1, 0, 0);
  CHECK(oracle::thrown_kind([&] { engine::run_trial(bad, 0); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("divergence is reported with trial and step") {
  auto cfg = make_config(linear_x0(4), GraphFlow::deterministic({graph::complete_graph(4)}), 1.0, 0.0, 1.0);
  cfg.gain = {3.0, 1, 0.0};
  cfg.horizon = 1000;
  try {
    engine::run_trial(cfg, 17);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Divergent);
    CHECK(std::string(e.what()).find("trial 17 step") != std::string::npos);
  }
  cfg.trials = 40;
  for (std::size_t threads : {1, 4}) {
    try {
      engine::run_ensemble(cfg, {.threads = threads, .chunk = 3});
      FAIL("expected divergence");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Divergent);
      CHECK(std::string(e.what()).find("trial 0 step") != std::string::npos);
    }
  }
}

TEST_CASE("ensemble statistics") {
  auto one = make_config({1.0, 2.0, 6.0}, GraphFlow::iid({graph::complete_graph(3), graph::empty_graph(3)}, {0.5, 0.5}),
                         0.2, 0.1, 0.1);
  one.horizon = 50;
  const auto st = engine::run_ensemble(one);
  const auto tr = engine::run_trial(one, 0);
  CHECK(st.trials == 1);
  CHECK(st.mean_v == tr.v);
  for (double s : st.se_v) CHECK(s == 0.0);
  CHECK(st.var_centroid == 0.0);
  CHECK(st.se_centroid == 0.0);
  CHECK(st.mean_centroid == tr.final_centroid);
  CHECK(st.mean_final_v == tr.final_v);
  CHECK(st.max_final_v == tr.final_v);
  CHECK(st.mean_rate_end == engine::rate_at_end(tr, one.gain, one.horizon));

  auto quiet = make_config({1.0, 2.0, 6.0, -3.0}, GraphFlow::deterministic({graph::undirected_ring(4)}), 0.5, 0, 0);
  quiet.trials = 20;
  quiet.horizon = 200;
  const auto q = engine::run_ensemble(quiet);
  CHECK(q.var_centroid == doctest::Approx(0.0).scale(1e-20));
  CHECK(q.mean_centroid == doctest::Approx(1.5).epsilon(1e-14));

  // Additive noise over an i.i.d. balanced flow: E x* is the initial average.
  auto add = make_config({0.0, 1.0, 2.0, 3.0}, GraphFlow::bernoulli_edge_failure(graph::complete_graph(4), 0.7), 0.3,
                         0.0, 0.5);
  add.trials = 2000;
  add.horizon = 400;
  add.base_seed = 9;
  const auto s = engine::run_ensemble(add);
  CHECK(s.se_centroid > 0.0);
  CHECK(std::abs(s.mean_centroid - 1.5) <= 4.0 * s.se_centroid);
  std::vector<engine::TrialResult> kept;
  add.trials = 130;
  const auto s2 = engine::run_ensemble(add, {}, &kept);
  REQUIRE(kept.size() == 130);
  for (std::size_t t = 0; t < kept.size(); t += 37) CHECK(kept[t].final_centroid == s2.final_centroids[t]);
}

TEST_CASE("ensemble results do not depend on threads or chunking order") {
  auto cfg = make_config(linear_x0(5), GraphFlow::bernoulli_edge_failure(graph::undirected_ring(5), 0.5), 0.4, 0.2, 0.1);
  cfg.trials = 300;
  cfg.horizon = 150;
  cfg.record_stride = 10;
  const auto ref = engine::run_ensemble(cfg, {.threads = 1});
  for (std::size_t threads : {2, 3, 8}) {
    const auto st = engine::run_ensemble(cfg, {.threads = threads});
    CHECK(st.mean_v == ref.mean_v);
    CHECK(st.se_v == ref.se_v);
    CHECK(st.final_centroids == ref.final_centroids);
    CHECK(st.mean_centroid == ref.mean_centroid);
    CHECK(st.var_centroid == ref.var_centroid);
    CHECK(st.mean_rate_end == ref.mean_rate_end);
  }
  // Different chunking changes only the merge tree of the V moments.
  const auto small = engine::run_ensemble(cfg, {.threads = 4, .chunk = 7});
  CHECK(small.final_centroids == ref.final_centroids);
  for (std::size_t s = 0; s < ref.mean_v.size(); ++s)
    CHECK(small.mean_v[s] == doctest::Approx(ref.mean_v[s]).epsilon(1e-12));
  CHECK(engine::thread_count(5) == 5);
  CHECK(engine::thread_count(0) >= 1);
}

TEST_CASE("centroid drift is a zero-mean martingale for balanced-in-mean flows") {
  // Signed weights: a_01 is +2 or -1, a_10 is 1 or 0, balanced only in mean.
  Matrix a(3, 3), b(3, 3);
  a(0, 1) = 2.0;
  a(1, 0) = 1.0;
  a(1, 2) = a(2, 1) = 0.5;
  b(0, 1) = -1.0;
  b(1, 2) = b(2, 1) = 0.5;
  auto cfg = make_config({3.0, -1.0, 0.5}, GraphFlow::iid({Digraph(a), Digraph(b)}, {0.5, 0.5}), 0.0, 0.0, 0.0);
  REQUIRE(flows::check_conditionally_balanced(cfg.flow));
  cfg.trials = 4000;
  cfg.horizon = 60;
  cfg.gain = {0.1, 1, 1.0};
  const auto st = engine::run_ensemble(cfg);
  CHECK(st.se_centroid > 0.0);
  CHECK(std::abs(st.mean_centroid - 2.5 / 3.0) <= 4.0 * st.se_centroid);
}

TEST_CASE("noise-free trajectories are permutation equivariant") {
  const std::vector<std::size_t> p{2, 0, 3, 1};
  const Matrix base = graph::undirected_ring(4).adjacency();
  Matrix extra(4, 4);
  extra(0, 2) = extra(2, 0) = 1.5;
  std::vector<Digraph> gs{Digraph(base), Digraph(extra)}, gp;
  for (const auto& g : gs) {
    Matrix m(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) m(p[i], p[j]) = g.weight(i, j);
    gp.emplace_back(m);
  }
  const std::vector<double> x0{1.0, -2.0, 0.5, 4.0};
  std::vector<double> x0p(4);
  for (std::size_t i = 0; i < 4; ++i) x0p[p[i]] = x0[i];
  auto cfg = make_config(x0, GraphFlow::iid(gs, {0.4, 0.6}), 0.0, 0.0, 0.0);
  auto cfgp = make_config(x0p, GraphFlow::iid(gp, {0.4, 0.6}), 0.0, 0.0, 0.0);
  cfg.horizon = cfgp.horizon = 100;
  cfg.record_state = cfgp.record_state = true;
  const auto r = engine::run_trial(cfg, 3);
  const auto rp = engine::run_trial(cfgp, 3);
  for (std::size_t s = 0; s < r.times.size(); ++s)
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(rp.states[s * 4 + p[i]] == doctest::Approx(r.states[s * 4 + i]).epsilon(1e-12));
}

TEST_CASE("rate at end") {
  engine::TrialResult t;
  t.delta_norm_sum = 40.0;
  CHECK(engine::rate_at_end(t, {1, 1, 0.75}, 0) == 0.0);
  const double c = 1.0 / std::pow(101.0, 0.75);
  CHECK(engine::rate_at_end(t, {1, 1, 0.75}, 100) == doctest::Approx(std::sqrt(c * 100) * 0.4).epsilon(1e-15));
}
