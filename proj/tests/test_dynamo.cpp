#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abclab/dynamo.hpp"
#include "abclab/spectral_field.hpp"
#include "oracle_helpers.hpp"

#include <cmath>
#include <complex>
#include <vector>

using namespace abclab;
using test::random_sample;

namespace {
constexpr double kPi = pi<double>();

NoisePath forced_path(std::vector<NoiseSample> samples) {
  NoisePath p;
  p.samples = std::move(samples);
  p.config = NoiseConfig{kPi, 42};
  return p;
}

NoisePath sampled_path(int n, std::uint64_t tag) {
  NoisePath p;
  p.config = NoiseConfig{kPi, 42};
  for (int i = 0; i < n; ++i) p.samples.push_back(random_sample(i, kPi, tag));
  return p;
}
}  // namespace

TEST_CASE("identity path keeps every L^p norm constant") {
  const MagneticInitialField b0 = make_magnetic_field("constant-z");
  for (double p : {1.0, 2.0, kPInfinity}) {
    const GrowthSeries s =
        magnetic_growth_series(b0, forced_path(std::vector<NoiseSample>(5)), p, 16,
                               {0, 1, 2, 3, 4, 5});
    for (double v : s.norms) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("zero field and bad grids are rejected") {
  const MagneticInitialField zero{"zero", [](const Vec3&) { return Vec3(0, 0, 0); }};
  CHECK_THROWS_AS(
      magnetic_growth_series(zero, forced_path(std::vector<NoiseSample>(1)), 1.0, 16, {0}),
      std::invalid_argument);
  CHECK_THROWS_AS(magnetic_growth_series(make_magnetic_field("constant-z"),
                                         forced_path(std::vector<NoiseSample>(1)), 1.0, 8, {0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_magnetic_field("nope"), std::invalid_argument);
}

TEST_CASE("Frobenius lower bound: identity, diagonal, and cocycle sweep") {
  const auto [lhs_i, rhs_i] = frobenius_bound_margin(Mat3::Identity(), Vec3(1, 0, 0));
  CHECK(lhs_i == doctest::Approx(1.0));
  CHECK(rhs_i == doctest::Approx(0.47140452079103173).epsilon(1e-14));

  Mat3 d = Mat3::Zero();
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  d(2, 2) = 1.0;
  const auto [lhs_d, rhs_d] = frobenius_bound_margin(d, Vec3(0, 1, 0));
  CHECK(lhs_d == doctest::Approx(0.5));
  CHECK(rhs_d == doctest::Approx(0.26937401188058957).epsilon(1e-14));

  for (int trial = 0; trial < 100; ++trial) {
    std::vector<NoiseSample> path;
    for (int i = 0; i < 50; ++i)
      path.push_back(random_sample(1000 * trial + i, kPi, 400));
    const auto [end, cocycle] =
        iterate_with_cocycle<double>(test::random_point(trial, 401), path);
    const auto [lhs, rhs] = frobenius_bound_margin(cocycle, test::random_unit(trial, 402));
    CHECK(lhs >= rhs);
  }
}

TEST_CASE("p-norm monotonicity on the normalized measure") {
  const MagneticInitialField b0 = make_magnetic_field("abc");
  const NoisePath path = sampled_path(6, 403);
  const GrowthSeries p1 = magnetic_growth_series(b0, path, 1.0, 16, {0, 2, 4, 6});
  const GrowthSeries p2 = magnetic_growth_series(b0, path, 2.0, 16, {0, 2, 4, 6});
  for (std::size_t i = 0; i < p1.norms.size(); ++i) CHECK(p2.norms[i] >= p1.norms[i]);
}

TEST_CASE("change of variables equals the reconstructed pushforward") {
  // brute force: evaluate B(n, y) = D phi (at the preimage) B0 on the y-grid
  const MagneticInitialField b0 = make_magnetic_field("constant-z");
  const NoisePath path = sampled_path(3, 404);
  const int n = 16;
  const GrowthSeries direct = magnetic_growth_series(b0, path, 1.0, n, {3});

  double pushforward_sum = 0.0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        Vec3 x = SpectralScalarField::node(n, ix, iy, iz);
        for (int k = 2; k >= 0; --k) x = inverse_step<double>(x, path[k]);
        const auto [img, cocycle] = iterate_with_cocycle<double>(x, path.samples);
        pushforward_sum += (cocycle * b0.eval(x)).norm();
      }
  const double pushforward = pushforward_sum / (n * n * n);
  CHECK(std::abs(pushforward - direct.norms[0]) / direct.norms[0] < 0.01);
}

TEST_CASE("reconstructed pushforward stays divergence free at small n") {
  // moderate amplitudes keep the n = 3 spectrum inside the N = 32 grid
  const MagneticInitialField b0 = make_magnetic_field("abc");
  NoisePath path;
  path.config = NoiseConfig{1.2, 42};
  for (int i = 0; i < 3; ++i) path.samples.push_back(random_sample(i, 1.2, 407));
  const int n = 32;
  SpectralScalarField bx(n), by(n), bz(n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        Vec3 x = SpectralScalarField::node(n, ix, iy, iz);
        for (int k = 2; k >= 0; --k) x = inverse_step<double>(x, path[k]);
        const auto [img, cocycle] = iterate_with_cocycle<double>(x, path.samples);
        const Vec3 b = cocycle * b0.eval(x);
        bx.value(ix, iy, iz) = b.x();
        by.value(ix, iy, iz) = b.y();
        bz.value(ix, iy, iz) = b.z();
      }
  // spectral divergence, relative to the gradient magnitude
  double div2 = 0.0, grad2 = 0.0;
  const int half = n / 2;
  for (int kx = -half; kx < half; ++kx)
    for (int ky = -half; ky < half; ++ky)
      for (int kz = -half; kz < half; ++kz) {
        const std::complex<double> cx = bx.coefficient(kx, ky, kz);
        const std::complex<double> cy = by.coefficient(kx, ky, kz);
        const std::complex<double> cz = bz.coefficient(kx, ky, kz);
        div2 += std::norm(double(kx) * cx + double(ky) * cy + double(kz) * cz);
        grad2 += (double(kx) * kx + double(ky) * ky + double(kz) * kz) *
                 (std::norm(cx) + std::norm(cy) + std::norm(cz));
      }
  CHECK(std::sqrt(div2 / grad2) < 0.01);
}

TEST_CASE("dynamo rate fits and the Lyapunov comparison") {
  GrowthSeries synth;
  synth.p = 1.0;
  synth.grid_size = 16;
  for (int t = 0; t <= 20; ++t) {
    synth.iterations.push_back(t);
    synth.norms.push_back(std::exp(0.3 * t));
  }
  LyapunovEstimate lam{0.25, 0.01, 1000, 10};
  const DynamoRateReport rep = dynamo_rate(synth, 0, 20, lam);
  CHECK(rep.fit.rate == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(rep.eta_at_least_lambda1);

  GrowthSeries flat = synth;
  for (double& v : flat.norms) v = 2.0;
  const DynamoRateReport frep = dynamo_rate(flat, 0, 20, lam);
  CHECK(frep.fit.rate == doctest::Approx(0.0));
  CHECK_FALSE(frep.eta_at_least_lambda1);
}

TEST_CASE("desk-scale growth is exponential and consistent with lambda1") {
  const NoiseConfig cfg{kPi, 987};
  NoisePath path = noise_path(cfg, 9, 24);
  std::vector<int> record;
  for (int i = 0; i <= 24; ++i) record.push_back(i);
  const GrowthSeries s =
      magnetic_growth_series(make_magnetic_field("constant-z"), path, 1.0, 16, record);
  const TopLyapunovResult lam = top_lyapunov(cfg, Vec3(0, 0, 0), Vec3(0, 0, 1), 2000, 16);
  const DynamoRateReport rep = dynamo_rate(s, 4, 24, lam.estimate);
  CHECK(rep.fit.rate > 0.0);
  CHECK(rep.fit.r2 > 0.9);
  CHECK(rep.eta_at_least_lambda1);
  for (std::size_t i = 1; i < s.norms.size(); ++i)  // strictly increasing on this seed
    CHECK(s.norms[i] > s.norms[i - 1]);
}
