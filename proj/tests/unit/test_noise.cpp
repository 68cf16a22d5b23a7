#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "stochavg/error.hpp"
#include "stochavg/noise.hpp"

using namespace stochavg;
using linalg::Matrix;
using noise::IntensityFunction;
using noise::NoiseKind;
using noise::NoiseModel;

namespace {

std::vector<double> draw(const NoiseModel& m, std::uint64_t k, noise::NoiseState& st, const rng::CounterStream& s) {
  std::vector<double> out(m.channels());
  noise::sample_noise(m, k, st, s, out);
  return out;
}

}  // namespace

TEST_CASE("intensity evaluation examples") {
  CHECK(noise::evaluate_intensity(IntensityFunction::affine(1, 0), -3) == 3.0);
  for (double x : {-100.0, 0.0, 3.5}) CHECK(noise::evaluate_intensity(IntensityFunction::additive(2), x) == 2.0);
  CHECK(noise::evaluate_intensity(IntensityFunction::multiplicative(0.5), 4) == 2.0);
  CHECK(oracle::thrown_kind([] { noise::evaluate_intensity(IntensityFunction::affine(1, 1), NAN); }) ==
        ErrorKind::NonFinite);
  CHECK(oracle::thrown_kind([] { noise::evaluate_intensity(IntensityFunction::affine(1, 1), INFINITY); }) ==
        ErrorKind::NonFinite);
  const auto blowup = IntensityFunction::custom([](double x) { return 1.0 / x; }, 0, 1);
  CHECK(oracle::thrown_kind([&] { noise::evaluate_intensity(blowup, 0.0); }) == ErrorKind::NonFinite);
  CHECK(oracle::thrown_kind([] { IntensityFunction::affine(-1, 0); }) == ErrorKind::InvalidArgument);

  const auto tab = IntensityFunction::tabulated({-1, 0, 2}, {1, 0, 1}, 1, 0);
  CHECK(tab(-5) == 1.0);
  CHECK(tab(1) == 0.5);
  CHECK(tab(7) == 1.0);
  CHECK(oracle::thrown_kind([] { IntensityFunction::tabulated({0, 0}, {1, 1}, 1, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("affine intensities are even and sigma-Lipschitz") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50), p(0, 3);
  for (int t = 0; t < 2000; ++t) {
    const auto f = IntensityFunction::affine(p(rng), p(rng));
    const double x = u(rng), y = u(rng);
    CHECK(f(x) == f(-x));
    CHECK(std::abs(f(x) - f(y)) <= f.sigma() * std::abs(x - y) * (1 + 1e-15) + 1e-13);
  }
}

TEST_CASE("envelope certification examples") {
  const rng::CounterStream s(1, 0, rng::Substream::Probe);
  const auto aff = noise::certify_envelope(IntensityFunction::affine(1, 1), 100, 10, s);
  CHECK(aff.ok);
  CHECK(aff.sigma == 1.0);
  CHECK(aff.b == 1.0);
  CHECK(noise::certify_envelope(IntensityFunction::custom([](double x) { return std::sin(x); }, 0, 1), 1000, 50, s).ok);
  const auto sq = noise::certify_envelope(IntensityFunction::custom([](double x) { return x * x; }, 1, 1), 100, 10, s);
  CHECK_FALSE(sq.ok);
  CHECK(std::abs(sq.worst_x) == doctest::Approx(10.0));
  // Violation only in a narrow band around 3 must still be caught at range 10.
  const auto bump = IntensityFunction::custom([](double x) { return std::abs(x - 3) < 0.02 ? 10.0 : 0.0; }, 1, 1);
  CHECK_FALSE(noise::certify_envelope(bump, 1, 10, s).ok);
  CHECK(oracle::thrown_kind([&] { noise::certify_envelope(IntensityFunction::affine(1, 1), 0, 1, s); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("intensity field channel layout") {
  noise::IntensityField field(3, IntensityFunction::affine(0.1, 0.2));
  CHECK(field.all_affine());
  field.set(2, 0, IntensityFunction::affine(0.5, 0.0));
  CHECK(field.sigma_channels()[0 * 3 + 2] == 0.5);
  CHECK(field.b_channels()[0 * 3 + 2] == 0.0);
  CHECK(field.sigma_channels()[2 * 3 + 0] == 0.1);
  CHECK(field.at(2, 0).sigma() == 0.5);
  CHECK(field.max_sigma() == 0.5);
  CHECK(field.max_b() == 0.2);
  field.set(1, 2, IntensityFunction::custom([](double x) { return std::tanh(x); }, 0, 1));
  CHECK_FALSE(field.all_affine());
  CHECK(oracle::thrown_kind([&] { field.set(3, 0, IntensityFunction::additive(1)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("noise model beta by construction") {
  CHECK(NoiseModel::iid_gaussian(3, 0.5).beta() == doctest::Approx(9 * 0.25));
  CHECK(NoiseModel::iid_uniform(2, 3.0).beta() == doctest::Approx(4 * 3.0));
  CHECK(NoiseModel::temporally_dependent(2, 1.0).beta() == doctest::Approx(4 * 2.0));
  const Matrix c{{1, 1, 0, 0}, {0, 1, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 0}};
  CHECK(NoiseModel::spatially_correlated(2, c, 0.5).beta() == doctest::Approx(0.25 * 7));
  auto m = NoiseModel::iid_gaussian(2, 1.0);
  CHECK(oracle::thrown_kind([&] { m.declare_beta(3.0); }) == ErrorKind::InvalidArgument);
  m.declare_beta(16.0);
  CHECK(m.beta() == 16.0);
  CHECK(oracle::thrown_kind([] { NoiseModel::spatially_correlated(2, Matrix::identity(3)); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(oracle::thrown_kind([] { NoiseModel::iid_gaussian(2, std::vector<double>(3, 1.0)); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("sample noise examples") {
  const rng::CounterStream s(9, 4, rng::Substream::Noise);
  noise::NoiseState st;
  const auto zero = NoiseModel::iid_gaussian(3, 0.0);
  for (std::uint64_t k = 0; k < 20; ++k)
    for (double v : draw(zero, k, st, s)) CHECK(v == 0.0);

  const auto eye = NoiseModel::spatially_correlated(2, Matrix::identity(4), 1.5);
  const auto gauss = NoiseModel::iid_gaussian(2, 1.5);
  const auto flat = NoiseModel::temporally_dependent(2, 1.5, [](double) { return 1.0; }, 1.0);
  noise::NoiseState a, b, c;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto x = draw(eye, k, a, s);
    const auto y = draw(gauss, k, b, s);
    const auto w = draw(flat, k, c, s);
    for (std::size_t q = 0; q < 4; ++q) {
      CHECK(x[q] == doctest::Approx(y[q]).epsilon(1e-15));
      CHECK(w[q] == doctest::Approx(y[q]).epsilon(1e-15));
    }
  }

  const auto uni = NoiseModel::iid_uniform(3, 0.25);
  for (std::uint64_t k = 0; k < 200; ++k)
    for (double v : draw(uni, k, st, s)) CHECK((v >= -0.25 && v < 0.25));

  std::vector<double> wrong(5);
  CHECK(oracle::thrown_kind([&] { noise::sample_noise(gauss, 0, st, s, wrong); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("temporal noise feeds its previous output through g") {
  const auto m = NoiseModel::temporally_dependent(2, 0.7);
  const rng::CounterStream s(10, 0, rng::Substream::Noise);
  noise::NoiseState st;
  std::vector<double> prev(4, 0.0), z(4);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto x = draw(m, k, st, s);
    s.normals(k, z);
    for (std::size_t q = 0; q < 4; ++q) {
      const double g = std::sqrt(1.0 + std::min(prev[q] * prev[q], 1.0));
      CHECK(x[q] == doctest::Approx(0.7 * z[q] * g).epsilon(1e-15));
    }
    prev = x;
  }
}

TEST_CASE("martingale check examples") {
  CHECK(noise::empirical_martingale_check(NoiseModel::iid_gaussian(2, 0.5), 100, 2000, 1).pass());

  const auto temporal = noise::empirical_martingale_check(NoiseModel::temporally_dependent(2, 1.0), 100, 2000, 2);
  CHECK(temporal.pass());
  CHECK(temporal.max_second_moment <= temporal.beta * 1.05);

  const std::size_t ch = 4;
  noise::NoiseProcess biased = [&](std::uint64_t trial, std::uint64_t k, std::span<double> out) {
    rng::CounterStream(3, trial, rng::Substream::Test).normals(k, out);
    for (double& v : out) v = 0.5 * v + 0.1;
  };
  const auto rep = noise::empirical_martingale_check(biased, ch, 4 * (0.25 + 0.01), 100, 2000);
  CHECK_FALSE(rep.means_ok);
  CHECK_FALSE(rep.pass());

  // Zero mean but variance above the declared beta.
  noise::NoiseProcess loud = [&](std::uint64_t trial, std::uint64_t k, std::span<double> out) {
    rng::CounterStream(4, trial, rng::Substream::Test).normals(k, out);
  };
  const auto over = noise::empirical_martingale_check(loud, ch, 2.0, 100, 2000);
  CHECK(over.means_ok);
  CHECK_FALSE(over.second_moment_ok);

  // Sign depends on the previous value: unconditional mean zero, conditional
  // mean not.
  noise::NoiseProcess predictable = [&](std::uint64_t trial, std::uint64_t k, std::span<double> out) {
    static thread_local std::vector<double> last;
    if (k == 0) last.assign(out.size(), 0.0);
    rng::CounterStream(5, trial, rng::Substream::Test).normals(k, out);
    for (std::size_t q = 0; q < out.size(); ++q) {
      out[q] = 0.5 * out[q] + (last[q] > 0.0 ? 0.3 : last[q] < 0.0 ? -0.3 : 0.0);
      last[q] = out[q];
    }
  };
  CHECK_FALSE(noise::empirical_martingale_check(predictable, ch, 100.0, 100, 2000).means_ok);
}

TEST_CASE("every built-in model passes the martingale check") {
  const std::size_t n = 2;
  Matrix c(n * n, n * n);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (double& v : c.data()) v = 0.5 * z(rng);
  const NoiseModel models[] = {
      NoiseModel::iid_gaussian(n, 0.3),
      NoiseModel::iid_uniform(n, 0.3 * std::sqrt(3.0)),
      NoiseModel::temporally_dependent(n, 0.3),
      NoiseModel::spatially_correlated(n, c, 1.0),
  };
  std::uint64_t seed = 20;
  for (const auto& m : models) {
    CAPTURE(noise::to_string(m.kind()));
    const auto rep = noise::empirical_martingale_check(m, 100, 10000, seed++);
    CHECK(rep.means_ok);
    CHECK(rep.second_moment_ok);
  }
}

TEST_CASE("gaussian second moment converges to beta") {
  const auto m = NoiseModel::iid_gaussian(2,
                                          std::vector<double>{0.1, 0.2, 0.3, 0.4});
  const rng::CounterStream s(31, 0, rng::Substream::Noise);
  noise::NoiseState st;
  const std::size_t draws = 200000;
  double sum = 0.0, sq = 0.0;
  for (std::uint64_t k = 0; k < draws; ++k) {
    double e = 0.0;
    for (double v : draw(m, k, st, s)) e += v * v;
    sum += e;
    sq += e * e;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sq / draws - mean * mean) / draws);
  CHECK(std::abs(mean - m.beta()) <= 3.0 * se);
  CHECK(m.beta() == doctest::Approx(0.01 + 0.04 + 0.09 + 0.16));
}

TEST_CASE("spatial noise has covariance s^2 C C^T") {
  const Matrix c{{1, 0.5, 0, 0}, {0, 1, 0, 0}, {0.3, 0, 1, 0}, {0, 0, -0.7, 0.2}};
  const auto m = NoiseModel::spatially_correlated(2, c, 0.8);
  const rng::CounterStream s(32, 0, rng::Substream::Noise);
  noise::NoiseState st;
  const std::size_t draws = 100000;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(4, 4);
  for (std::uint64_t k = 0; k < draws; ++k) {
    const auto x = draw(m, k, st, s);
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), 4);
    cov += v * v.transpose();
  }
  cov /= static_cast<double>(draws);
  const Eigen::MatrixXd ce = oracle::to_eigen(c);
  const Eigen::MatrixXd want = 0.64 * ce * ce.transpose();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double se = std::sqrt((want(i, i) * want(j, j) + want(i, j) * want(i, j)) / draws);
      CHECK(std::abs(cov(i, j) - want(i, j)) <= 4.0 * se + 1e-12);
    }
}
