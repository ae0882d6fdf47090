#ifndef ABCLAB_LYAPUNOV_HPP
#define ABCLAB_LYAPUNOV_HPP

#include "abclab/noise.hpp"
#include "abclab/torus_map.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace abclab {

struct ProjectiveState {
  Vec3 position;
  Vec3 direction;    // unit
  double log_growth; // log |D_x f_w v|
};

/// One step of the projective chain: (x, v) -> (f_w(x), D_x f_w v / |D_x f_w v|).
/// Throws on degenerate growth (|D_x f_w v| < 1e-300), which cannot occur for
/// bounded noise and signals corrupted input.
ProjectiveState projective_step(const Vec3& x, const Vec3& v, const NoiseSample& w);

struct LyapunovEstimate {
  double lambda = 0.0;   // per iteration
  double stderr_ = 0.0;
  int n_steps = 0;
  int n_ensemble = 0;
};

struct TopLyapunovResult {
  LyapunovEstimate estimate;
  std::vector<double> per_trajectory;  // one averaged log-growth per ensemble member
};

/// Mean log-growth along one forced path, renormalizing every step.  Initial
/// direction is normalized on entry; a zero vector is rejected.
double trajectory_log_growth(std::span<const NoiseSample> path, const Vec3& x0, const Vec3& v0,
                             std::vector<double>* per_step = nullptr);

/// Monte Carlo estimate of the top Lyapunov exponent over an ensemble of
/// independent trajectories with disjoint noise streams.  Standard errors use
/// batch means (20 batches) over trajectories, or over time batches when the
/// ensemble has a single member.
TopLyapunovResult top_lyapunov(const NoiseConfig& cfg, const Vec3& x0, const Vec3& v0,
                               int n_steps, int n_ensemble);

struct SpectrumEstimate {
  double lambda[3] = {0.0, 0.0, 0.0};   // descending
  double stderr_[3] = {0.0, 0.0, 0.0};
  double sum = 0.0;
  double sum_stderr = 0.0;
  int n_steps = 0;
  int n_ensemble = 0;
};

/// Mean per-step log stretch factors (descending) along one forced path, by
/// QR reorthonormalization of a propagated frame.
Eigen::Vector3d spectrum_log_stretch(std::span<const NoiseSample> path, const Vec3& x0);

/// Full spectrum by QR reorthonormalization of a propagated frame; the three
/// per-step diagonal stretch factors accumulate into the exponents, and their
/// sum telescopes through det = 1.
SpectrumEstimate lyapunov_spectrum(const NoiseConfig& cfg, const Vec3& x0, int n_steps,
                                   int n_ensemble);

struct UniformityReport {
  double chi_square = 0.0;
  double p_value = 1.0;
  int bins_per_axis = 0;
  int dof = 0;
  long long n_used = 0;
  double expected_per_bin = 0.0;
};

/// Chi-square goodness of fit of the one-point chain trajectory against the
/// uniform law on a bins^3 partition, after discarding `burn_in` iterations.
UniformityReport one_point_uniformity(const NoiseConfig& cfg, const Vec3& x0,
                                      long long n_steps, int bins_per_axis,
                                      long long burn_in = 1000);

/// Same statistic for an explicitly supplied path (no sampling).
UniformityReport one_point_uniformity_path(std::span<const NoiseSample> path, const Vec3& x0,
                                           int bins_per_axis, long long burn_in = 0);

}  // namespace abclab

#endif
