#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abclab/lyapunov.hpp"
#include "abclab/stats.hpp"
#include "oracle_helpers.hpp"

#include <cmath>
#include <vector>

using namespace abclab;
using test::random_point;
using test::random_sample;
using test::random_unit;

namespace {
constexpr double kPi = pi<double>();
}

TEST_CASE("projective_step: identity noise and Jacobian oracle") {
  NoiseSample zero;
  zero.phase_a = 0.4;
  const Vec3 x(1, 2, 3), v(0, 0, 1);
  const ProjectiveState s = projective_step(x, v, zero);
  CHECK(torus_distance<double>(s.position, x) == 0.0);
  CHECK((s.direction - v).norm() == 0.0);
  CHECK(s.log_growth == 0.0);

  NoiseSample w;
  w.amp_a = 1;
  w.amp_b = 1;
  w.phase_b = kPi / 2;
  const ProjectiveState t = projective_step(Vec3(0, 0, 0), Vec3(0, 0, 1), w);
  const Vec3 image = jacobian_step<double>(Vec3(0, 0, 0), w) * Vec3(0, 0, 1);
  CHECK(t.log_growth == doctest::Approx(std::log(image.norm())).epsilon(1e-14));
  CHECK((t.direction - image / image.norm()).norm() < 1e-14);
}

TEST_CASE("log growth is bounded by the largest Frobenius norm") {
  double log_bound = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Mat3 j = jacobian_step<double>(random_point(i, 200), random_sample(i, kPi, 201));
    log_bound = std::max(log_bound, 0.5 * std::log(j.squaredNorm()));
  }
  for (int i = 0; i < 10000; ++i) {
    const ProjectiveState s = projective_step(random_point(i, 202), random_unit(i, 203),
                                              random_sample(i, kPi, 204));
    CHECK(s.log_growth <= log_bound);
  }
}

TEST_CASE("forced identity path gives a zero exponent and spectrum") {
  std::vector<NoiseSample> path(50);
  CHECK(trajectory_log_growth(path, Vec3(0.3, 0.4, 0.5), Vec3(1, 0, 0)) == 0.0);
  const Eigen::Vector3d stretch = spectrum_log_stretch(path, Vec3(0.3, 0.4, 0.5));
  CHECK(stretch.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unit direction is maintained over a million steps") {
  CHECK_THROWS_AS(trajectory_log_growth({}, Vec3(0, 0, 0), Vec3(0, 0, 0)),
                  std::invalid_argument);
  Vec3 x(0.1, 0.2, 0.3), v(0, 1, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const ProjectiveState s = projective_step(x, v, random_sample(i, kPi, 205));
    x = s.position;
    v = s.direction;
    worst = std::max(worst, std::abs(v.squaredNorm() - 1.0));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("estimates are bitwise independent of the worker count") {
  const NoiseConfig cfg{kPi, 777};
  setenv("ABC_LAB_THREADS", "1", 1);
  const TopLyapunovResult serial = top_lyapunov(cfg, Vec3(0, 0, 0), Vec3(0, 0, 1), 500, 12);
  const SpectrumEstimate sp_serial = lyapunov_spectrum(cfg, Vec3(0, 0, 0), 500, 12);
  setenv("ABC_LAB_THREADS", "5", 1);
  const TopLyapunovResult wide = top_lyapunov(cfg, Vec3(0, 0, 0), Vec3(0, 0, 1), 500, 12);
  const SpectrumEstimate sp_wide = lyapunov_spectrum(cfg, Vec3(0, 0, 0), 500, 12);
  unsetenv("ABC_LAB_THREADS");
  CHECK(serial.estimate.lambda == wide.estimate.lambda);
  CHECK(serial.estimate.stderr_ == wide.estimate.stderr_);
  for (int t = 0; t < 12; ++t) CHECK(serial.per_trajectory[t] == wide.per_trajectory[t]);
  for (int d = 0; d < 3; ++d) CHECK(sp_serial.lambda[d] == sp_wide.lambda[d]);
}

TEST_CASE("top exponent: positivity, v0 invariance, spectrum consistency") {
  const NoiseConfig cfg{kPi, 4242};
  const TopLyapunovResult a = top_lyapunov(cfg, Vec3(0, 0, 0), Vec3(0, 0, 1), 2000, 24);
  CHECK(a.estimate.lambda - 1.96 * a.estimate.stderr_ > 0.0);

  const TopLyapunovResult b = top_lyapunov(cfg, Vec3(0, 0, 0), Vec3(1, 0, 0), 2000, 24);
  const double se = std::hypot(a.estimate.stderr_, b.estimate.stderr_);
  CHECK(std::abs(a.estimate.lambda - b.estimate.lambda) <= 3.0 * se);

  const SpectrumEstimate sp = lyapunov_spectrum(cfg, Vec3(0, 0, 0), 2000, 24);
  CHECK(sp.lambda[0] >= sp.lambda[1]);
  CHECK(sp.lambda[1] >= sp.lambda[2]);
  CHECK(std::abs(sp.sum) <= std::max(3.0 * sp.sum_stderr, 1e-8));
  const double cross_se = std::hypot(a.estimate.stderr_, sp.stderr_[0]);
  CHECK(std::abs(sp.lambda[0] - a.estimate.lambda) <= 3.0 * cross_se);
}

TEST_CASE("volume preservation telescopes the spectrum sum") {
  std::vector<NoiseSample> path;
  for (int i = 0; i < 10000; ++i) path.push_back(random_sample(i, kPi, 206));
  const Eigen::Vector3d stretch = spectrum_log_stretch(path, Vec3(1, 1, 1));
  CHECK(std::abs(stretch.sum()) < 1e-8);
}

TEST_CASE("one-point chain uniformity") {
  const NoiseConfig cfg{kPi, 271828};
  const UniformityReport rep = one_point_uniformity(cfg, Vec3(0, 0, 0), 1000000, 8);
  CHECK(rep.dof == 511);
  CHECK(rep.p_value > 0.01);

  // a stuck chain piles every sample into one bin
  std::vector<NoiseSample> frozen(5000);
  const UniformityReport stuck = one_point_uniformity_path(frozen, Vec3(0.1, 0.1, 0.1), 2);
  CHECK(stuck.p_value < 1e-6);

  CHECK_THROWS_AS(one_point_uniformity(cfg, Vec3(0, 0, 0), 1000, 1), std::invalid_argument);
  CHECK_THROWS_AS(one_point_uniformity(cfg, Vec3(0, 0, 0), 1100, 8, 1000),
                  std::invalid_argument);  // expected count < 5
}

TEST_CASE("chi-square upper tail against reference values") {
  CHECK(chi_square_pvalue(14.067, 7) == doctest::Approx(0.050002444680797654).epsilon(1e-10));
  CHECK(chi_square_pvalue(511.0, 511) == doctest::Approx(0.4916803947663074).epsilon(1e-10));
  CHECK(chi_square_pvalue(5.99146, 2) == doctest::Approx(0.05000011367782876).epsilon(1e-10));
}

TEST_CASE("batch means handle short and constant inputs") {
  std::vector<double> constant(100, 3.5);
  const MeanStderr ms = batch_mean_stderr(constant);
  CHECK(ms.mean == doctest::Approx(3.5));
  CHECK(ms.stderr_ == 0.0);
  CHECK(batch_mean_stderr({}).mean == 0.0);
  const MeanStderr one = batch_mean_stderr(std::vector<double>{2.0});
  CHECK(one.mean == doctest::Approx(2.0));
  CHECK(one.stderr_ == 0.0);
}
