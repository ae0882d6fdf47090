#include "abclab/lyapunov.hpp"

#include "abclab/parallel.hpp"
#include "abclab/stats.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace abclab {

namespace {

Vec3 normalized_or_throw(const Vec3& v) {
  const double n = v.norm();
  if (n < 1e-12) throw std::invalid_argument("lyapunov: initial direction must be nonzero");
  return v / n;
}

}  // namespace

ProjectiveState projective_step(const Vec3& x, const Vec3& v, const NoiseSample& w) {
  const Vec3 image = jacobian_step<double>(x, w) * v;
  const double growth = image.norm();
  if (growth < 1e-300) throw std::runtime_error("projective_step: degenerate growth");
  return {step<double>(x, w), image / growth, std::log(growth)};
}

double trajectory_log_growth(std::span<const NoiseSample> path, const Vec3& x0, const Vec3& v0,
                             std::vector<double>* per_step) {
  Vec3 x = wrap_point<double>(x0);
  Vec3 v = normalized_or_throw(v0);
  double sum = 0.0;
  for (const NoiseSample& w : path) {
    const ProjectiveState next = projective_step(x, v, w);
    sum += next.log_growth;
    if (per_step) per_step->push_back(next.log_growth);
    x = next.position;
    v = next.direction;
  }
  return path.empty() ? 0.0 : sum / static_cast<double>(path.size());
}

TopLyapunovResult top_lyapunov(const NoiseConfig& cfg, const Vec3& x0, const Vec3& v0,
                               int n_steps, int n_ensemble) {
  validate(cfg);
  if (n_steps < 1 || n_ensemble < 1)
    throw std::invalid_argument("top_lyapunov: n_steps and n_ensemble must be >= 1");
  const Vec3 v_init = normalized_or_throw(v0);

  TopLyapunovResult out;
  out.per_trajectory.resize(n_ensemble);
  std::vector<std::vector<double>> per_step_single;
  if (n_ensemble == 1) per_step_single.resize(1);

  parallel_for_index(static_cast<std::size_t>(n_ensemble), [&](std::size_t t) {
    Vec3 x = wrap_point<double>(x0);
    Vec3 v = v_init;
    double sum = 0.0;
    std::vector<double>* steps = (n_ensemble == 1) ? &per_step_single[0] : nullptr;
    if (steps) steps->reserve(n_steps);
    const std::uint64_t stream = streams::domain(streams::kLyapunov, t);
    for (int i = 1; i <= n_steps; ++i) {
      const NoiseSample w = sample_noise(cfg, stream, static_cast<std::uint64_t>(i));
      const ProjectiveState next = projective_step(x, v, w);
      sum += next.log_growth;
      if (steps) steps->push_back(next.log_growth);
      x = next.position;
      v = next.direction;
    }
    out.per_trajectory[t] = sum / n_steps;
  });

  MeanStderr ms;
  if (n_ensemble == 1) {
    ms = batch_mean_stderr(per_step_single[0]);
  } else {
    ms = batch_mean_stderr(out.per_trajectory);
  }
  out.estimate.lambda = ms.mean;
  out.estimate.stderr_ = ms.stderr_;
  out.estimate.n_steps = n_steps;
  out.estimate.n_ensemble = n_ensemble;
  return out;
}

Eigen::Vector3d spectrum_log_stretch(std::span<const NoiseSample> path, const Vec3& x0) {
  Vec3 x = wrap_point<double>(x0);
  Mat3 frame = Mat3::Identity();
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (const NoiseSample& w : path) {
    const Mat3 m = jacobian_step<double>(x, w) * frame;
    Eigen::HouseholderQR<Mat3> qr(m);
    Mat3 q = qr.householderQ();
    Mat3 r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int d = 0; d < 3; ++d) {
      if (r(d, d) < 0.0) {  // fix the sign convention: positive diagonal
        r.row(d) = -r.row(d);
        q.col(d) = -q.col(d);
      }
      if (r(d, d) < 1e-300) throw std::runtime_error("lyapunov_spectrum: degenerate frame");
      acc[d] += std::log(r(d, d));
    }
    frame = q;
    x = step<double>(x, w);
  }
  return path.empty() ? acc : Eigen::Vector3d(acc / static_cast<double>(path.size()));
}

SpectrumEstimate lyapunov_spectrum(const NoiseConfig& cfg, const Vec3& x0, int n_steps,
                                   int n_ensemble) {
  validate(cfg);
  if (n_steps < 1 || n_ensemble < 1)
    throw std::invalid_argument("lyapunov_spectrum: n_steps and n_ensemble must be >= 1");

  std::vector<Eigen::Vector3d> per_traj(n_ensemble);
  parallel_for_index(static_cast<std::size_t>(n_ensemble), [&](std::size_t t) {
    std::vector<NoiseSample> path;
    path.reserve(n_steps);
    const std::uint64_t stream = streams::domain(streams::kSpectrum, t);
    for (int i = 1; i <= n_steps; ++i)
      path.push_back(sample_noise(cfg, stream, static_cast<std::uint64_t>(i)));
    per_traj[t] = spectrum_log_stretch(path, x0);
  });

  SpectrumEstimate out;
  out.n_steps = n_steps;
  out.n_ensemble = n_ensemble;
  std::vector<double> comp(n_ensemble), sums(n_ensemble);
  for (int d = 0; d < 3; ++d) {
    for (int t = 0; t < n_ensemble; ++t) comp[t] = per_traj[t][d];
    const MeanStderr ms = batch_mean_stderr(comp);
    out.lambda[d] = ms.mean;
    out.stderr_[d] = ms.stderr_;
  }
  for (int t = 0; t < n_ensemble; ++t) sums[t] = per_traj[t].sum();
  const MeanStderr ms = batch_mean_stderr(sums);
  out.sum = ms.mean;
  out.sum_stderr = ms.stderr_;
  return out;
}

namespace {

UniformityReport uniformity_from_counts(const std::vector<long long>& counts, int bins,
                                        long long n_used) {
  UniformityReport rep;
  rep.bins_per_axis = bins;
  rep.n_used = n_used;
  const double total_bins = static_cast<double>(counts.size());
  rep.expected_per_bin = static_cast<double>(n_used) / total_bins;
  if (rep.expected_per_bin < 5.0)
    throw std::invalid_argument("one_point_uniformity: expected bin count < 5; need more steps");
  double chi2 = 0.0;
  for (long long c : counts) {
    const double d = static_cast<double>(c) - rep.expected_per_bin;
    chi2 += d * d / rep.expected_per_bin;
  }
  rep.chi_square = chi2;
  rep.dof = static_cast<int>(counts.size()) - 1;
  rep.p_value = chi_square_pvalue(chi2, rep.dof);
  return rep;
}

inline int bin_of(double coord, int bins) {
  int b = static_cast<int>(coord * bins / two_pi<double>());
  if (b >= bins) b = bins - 1;  // guard the wrap boundary
  if (b < 0) b = 0;
  return b;
}

}  // namespace

UniformityReport one_point_uniformity(const NoiseConfig& cfg, const Vec3& x0,
                                      long long n_steps, int bins_per_axis,
                                      long long burn_in) {
  validate(cfg);
  if (bins_per_axis < 2)
    throw std::invalid_argument("one_point_uniformity: bins-per-axis must be >= 2");
  if (n_steps <= burn_in)
    throw std::invalid_argument("one_point_uniformity: n_steps must exceed burn-in");
  std::vector<long long> counts(static_cast<std::size_t>(bins_per_axis) * bins_per_axis *
                                    bins_per_axis,
                                0);
  Vec3 x = wrap_point<double>(x0);
  const std::uint64_t stream = streams::domain(streams::kChain, 0);
  long long used = 0;
  for (long long i = 1; i <= n_steps; ++i) {
    x = step<double>(x, sample_noise(cfg, stream, static_cast<std::uint64_t>(i)));
    if (i <= burn_in) continue;
    const int bx = bin_of(x.x(), bins_per_axis);
    const int by = bin_of(x.y(), bins_per_axis);
    const int bz = bin_of(x.z(), bins_per_axis);
    ++counts[(static_cast<std::size_t>(bx) * bins_per_axis + by) * bins_per_axis + bz];
    ++used;
  }
  return uniformity_from_counts(counts, bins_per_axis, used);
}

UniformityReport one_point_uniformity_path(std::span<const NoiseSample> path, const Vec3& x0,
                                           int bins_per_axis, long long burn_in) {
  if (bins_per_axis < 2)
    throw std::invalid_argument("one_point_uniformity: bins-per-axis must be >= 2");
  std::vector<long long> counts(static_cast<std::size_t>(bins_per_axis) * bins_per_axis *
                                    bins_per_axis,
                                0);
  Vec3 x = wrap_point<double>(x0);
  long long used = 0, i = 0;
  for (const NoiseSample& w : path) {
    x = step<double>(x, w);
    if (++i <= burn_in) continue;
    const int bx = bin_of(x.x(), bins_per_axis);
    const int by = bin_of(x.y(), bins_per_axis);
    const int bz = bin_of(x.z(), bins_per_axis);
    ++counts[(static_cast<std::size_t>(bx) * bins_per_axis + by) * bins_per_axis + bz];
    ++used;
  }
  return uniformity_from_counts(counts, bins_per_axis, used);
}

}  // namespace abclab
