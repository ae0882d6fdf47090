#include "abclab/transport.hpp"

#include "abclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abclab {

BackTrajectoryGrid BackTrajectoryGrid::identity(int grid_size) {
  BackTrajectoryGrid grid;
  grid.grid_size = grid_size;
  grid.iteration = 0;
  grid.points.resize(static_cast<std::size_t>(grid_size) * grid_size * grid_size);
  for (int ix = 0; ix < grid_size; ++ix)
    for (int iy = 0; iy < grid_size; ++iy)
      for (int iz = 0; iz < grid_size; ++iz)
        grid.points[(static_cast<std::size_t>(ix) * grid_size + iy) * grid_size + iz] =
            SpectralScalarField::node(grid_size, ix, iy, iz);
  return grid;
}

BackTrajectoryGrid back_trajectories(const NoisePath& path, int iteration, int grid_size) {
  if (iteration < 0 || iteration > static_cast<int>(path.size()))
    throw std::invalid_argument("back_trajectories: iteration outside path");
  BackTrajectoryGrid grid = BackTrajectoryGrid::identity(grid_size);
  grid.iteration = iteration;
  parallel_for_index(grid.points.size(), [&](std::size_t i) {
    Vec3 x = grid.points[i];
    for (int k = iteration - 1; k >= 0; --k) x = inverse_step<double>(x, path[k]);
    grid.points[i] = x;
  });
  return grid;
}

std::vector<SpectralScalarField> pullback_evolve(
    const SpectralScalarField& field0, const NoisePath& path, const std::vector<int>& record,
    const std::optional<AnalyticScalar>& analytic) {
  if (!std::is_sorted(record.begin(), record.end()))
    throw std::invalid_argument("pullback_evolve: record times must be sorted ascending");
  const int n = field0.grid_size();
  if (!analytic) field0.coefficients();  // materialize before the parallel region
  std::vector<SpectralScalarField> out;
  out.reserve(record.size());
  for (int rec : record) {
    if (rec == 0) {
      out.push_back(field0);
      continue;
    }
    const BackTrajectoryGrid grid = back_trajectories(path, rec, n);
    SpectralScalarField field(n);
    auto& vals = field.mutable_values();
    parallel_for_index(grid.points.size(), [&](std::size_t i) {
      vals[i] = analytic ? analytic->eval(grid.points[i])
                         : field0.interpolate(grid.points[i]);
    });
    field.project_mean_free();
    out.push_back(std::move(field));
  }
  return out;
}

namespace {

Vec3 uniform_point(std::uint64_t seed, std::uint64_t sample_id) {
  CounterRng rng(seed, streams::domain(streams::kMcPoints, sample_id), 0);
  return {rng.next_angle(), rng.next_angle(), rng.next_angle()};
}

/// Advances one stochastic characteristic by one full iteration: each shear
/// followed by a Gaussian kick of per-axis variance 2*kappa.  Kick normals are
/// drawn from a counter keyed by (sample, replica, iteration, shear) so that
/// matched seeds share random numbers across kappa values.
Vec3 diffusive_iteration(Vec3 x, const NoiseSample& w, double kick_std, std::uint64_t seed,
                         std::uint64_t sample_id, int replica, int iteration) {
  const ShearAxis axes[3] = {ShearAxis::A, ShearAxis::B, ShearAxis::C};
  const double amps[3] = {w.amp_a, w.amp_b, w.amp_c};
  const double phases[3] = {w.phase_a, w.phase_b, w.phase_c};
  for (int a = 0; a < 3; ++a) {
    x = shear<double>(axes[a], x, amps[a], phases[a]);
    if (kick_std > 0.0) {
      CounterRng rng(seed,
                     streams::domain(streams::kMcKicks, (sample_id << 8) | std::uint64_t(replica)),
                     (static_cast<std::uint64_t>(iteration) << 2) | std::uint64_t(a));
      double g0, g1, g2, g3;
      rng.next_gaussian_pair(g0, g1);
      rng.next_gaussian_pair(g2, g3);
      x = wrap_point<double>(Vec3(x.x() + kick_std * g0, x.y() + kick_std * g1,
                                  x.z() + kick_std * g2));
    }
  }
  return x;
}

}  // namespace

std::vector<McPoint> correlation_mc(const AnalyticScalar& g, const AnalyticScalar& h,
                                    const NoisePath& path, double kappa, int n_samples,
                                    const std::vector<int>& t_record, int n_replicas) {
  if (n_samples < 1 || n_replicas < 1)
    throw std::invalid_argument("correlation_mc: sample counts must be >= 1");
  if (!std::is_sorted(t_record.begin(), t_record.end()))
    throw std::invalid_argument("correlation_mc: record times must be sorted ascending");
  if (kappa < 0.0) throw std::invalid_argument("correlation_mc: kappa must be >= 0");
  const double kick_std = kappa > 0.0 ? std::sqrt(2.0 * kappa) : 0.0;
  const std::uint64_t seed = path.config.seed;
  const int reps = kappa > 0.0 ? n_replicas : 1;
  const std::size_t n_rec = t_record.size();

  // per-sample replica means, per record time
  std::vector<std::vector<double>> sample_vals(n_rec,
                                               std::vector<double>(n_samples, 0.0));
  parallel_for_index(static_cast<std::size_t>(n_samples), [&](std::size_t j) {
    const Vec3 x0 = uniform_point(seed, j);
    const double gj = g.eval(x0);
    for (int r = 0; r < reps; ++r) {
      Vec3 x = x0;
      std::size_t rec = 0;
      for (int t = 0; rec < n_rec; ++t) {
        while (rec < n_rec && t_record[rec] == t) {
          sample_vals[rec][j] += gj * h.eval(x) / reps;
          ++rec;
        }
        if (rec >= n_rec) break;
        if (t >= static_cast<int>(path.size()))
          throw std::invalid_argument("correlation_mc: record time beyond path length");
        x = diffusive_iteration(x, path[t], kick_std, seed, j, r, t);
      }
    }
  });

  std::vector<McPoint> out(n_rec);
  for (std::size_t rec = 0; rec < n_rec; ++rec) {
    double mean = 0.0;
    for (double v : sample_vals[rec]) mean += v;
    mean /= n_samples;
    double var = 0.0;
    for (double v : sample_vals[rec]) var += (v - mean) * (v - mean);
    var = n_samples > 1 ? var / (n_samples - 1) : 0.0;
    out[rec] = {t_record[rec], mean, std::sqrt(var / n_samples)};
  }
  return out;
}

std::vector<DiffusiveNormPoint> hs_norm_diffusive(const AnalyticScalar& rho0, double rho0_l2,
                                                  const NoisePath& path, double kappa,
                                                  int k_cutoff, double s, int n_samples,
                                                  const std::vector<int>& t_record) {
  if (kappa <= 0.0) throw std::invalid_argument("hs_norm_diffusive: kappa must be > 0");
  if (k_cutoff < 2) throw std::invalid_argument("hs_norm_diffusive: k-cutoff must be >= 2");
  if (n_samples < 2) throw std::invalid_argument("hs_norm_diffusive: need >= 2 samples");
  if (!std::is_sorted(t_record.begin(), t_record.end()))
    throw std::invalid_argument("hs_norm_diffusive: record times must be sorted ascending");
  const double kick_std = std::sqrt(2.0 * kappa);
  const std::uint64_t seed = path.config.seed;
  const std::size_t n_rec = t_record.size();

  // enumerate modes 0 < |k|_inf <= k_cutoff
  struct Mode {
    int kx, ky, kz;
    double weight;  // |k|^{-2s}
  };
  std::vector<Mode> modes;
  for (int kx = -k_cutoff; kx <= k_cutoff; ++kx)
    for (int ky = -k_cutoff; ky <= k_cutoff; ++ky)
      for (int kz = -k_cutoff; kz <= k_cutoff; ++kz) {
        if (kx == 0 && ky == 0 && kz == 0) continue;
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        modes.push_back({kx, ky, kz, std::pow(k2, -s)});
      }
  const std::size_t n_modes = modes.size();

  // accumulate per-chunk partials of fixed size, reduced in chunk order, so
  // the result is independent of the worker count
  using C = std::complex<double>;
  constexpr std::size_t kChunk = 256;
  const std::size_t n_chunks = (static_cast<std::size_t>(n_samples) + kChunk - 1) / kChunk;
  std::vector<std::vector<std::vector<C>>> part_z(
      n_chunks, std::vector<std::vector<C>>(n_rec, std::vector<C>(n_modes, C(0, 0))));
  std::vector<std::vector<std::vector<double>>> part_a2(
      n_chunks, std::vector<std::vector<double>>(n_rec, std::vector<double>(n_modes, 0.0)));

  parallel_for_index(n_chunks, [&](std::size_t ci) {
    const std::size_t begin = ci * kChunk;
    const std::size_t end = std::min<std::size_t>(n_samples, begin + kChunk);
    for (std::size_t j = begin; j < end; ++j) {
      const Vec3 x0 = uniform_point(seed, j);
      const double w0 = rho0.eval(x0);
      Vec3 x = x0;
      std::size_t rec = 0;
      for (int t = 0; rec < n_rec; ++t) {
        while (rec < n_rec && t_record[rec] == t) {
          for (std::size_t m = 0; m < n_modes; ++m) {
            const double phase =
                -(modes[m].kx * x.x() + modes[m].ky * x.y() + modes[m].kz * x.z());
            const C z = w0 * C(std::cos(phase), std::sin(phase));
            part_z[ci][rec][m] += z;
            part_a2[ci][rec][m] += std::norm(z);
          }
          ++rec;
        }
        if (rec >= n_rec) break;
        if (t >= static_cast<int>(path.size()))
          throw std::invalid_argument("hs_norm_diffusive: record time beyond path length");
        x = diffusive_iteration(x, path[t], kick_std, seed, j, 0, t);
      }
    }
  });
  std::vector<std::vector<C>> sum_z(n_rec, std::vector<C>(n_modes, C(0, 0)));
  std::vector<std::vector<double>> sum_abs2(n_rec, std::vector<double>(n_modes, 0.0));
  for (std::size_t ci = 0; ci < n_chunks; ++ci)
    for (std::size_t rec = 0; rec < n_rec; ++rec)
      for (std::size_t m = 0; m < n_modes; ++m) {
        sum_z[rec][m] += part_z[ci][rec][m];
        sum_abs2[rec][m] += part_a2[ci][rec][m];
      }

  std::vector<DiffusiveNormPoint> out(n_rec);
  const double nn = static_cast<double>(n_samples);
  for (std::size_t rec = 0; rec < n_rec; ++rec) {
    double total = 0.0, var_total = 0.0, floor2 = 0.0;
    for (std::size_t m = 0; m < n_modes; ++m) {
      const C mhat = sum_z[rec][m] / nn;
      const double mhat2 = std::norm(mhat);
      // sample variance of the complex summand (real+imag parts combined)
      const double s2 = std::max(0.0, (sum_abs2[rec][m] / nn - mhat2) * nn / (nn - 1.0));
      const double debiased = mhat2 - s2 / nn;  // unbiased estimate of |rho_hat|^2
      total += modes[m].weight * debiased;
      floor2 += modes[m].weight * s2 / nn;
      // Var(|mhat|^2) ~ 2 |m|^2 s^2/n + (s^2/n)^2
      var_total +=
          modes[m].weight * modes[m].weight * (2.0 * mhat2 * s2 / nn + (s2 / nn) * (s2 / nn));
    }
    DiffusiveNormPoint p;
    p.t = t_record[rec];
    p.value = std::sqrt(std::max(0.0, total));
    const double se_total = std::sqrt(var_total);
    p.stderr_ = p.value > 0.0 ? se_total / (2.0 * p.value) : std::sqrt(se_total);
    p.noise_floor = std::sqrt(floor2);
    p.truncation_bound = rho0_l2 / std::pow(double(k_cutoff + 1), s);
    out[rec] = p;
  }
  return out;
}

}  // namespace abclab
