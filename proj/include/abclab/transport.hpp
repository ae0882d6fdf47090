#ifndef ABCLAB_TRANSPORT_HPP
#define ABCLAB_TRANSPORT_HPP

#include "abclab/noise.hpp"
#include "abclab/spectral_field.hpp"
#include "abclab/stats.hpp"
#include "abclab/torus_map.hpp"

#include <optional>
#include <vector>

namespace abclab {

/// Preimage points X = phi_n^{-1}(node) for every grid node; exact
/// characteristics, no interpolation.
struct BackTrajectoryGrid {
  int grid_size = 0;
  int iteration = 0;
  std::vector<Vec3> points;

  static BackTrajectoryGrid identity(int grid_size);
};

/// Pulls every node back through the first n samples of the path
/// (phi_n^{-1} = f_{w_1}^{-1} o ... o f_{w_n}^{-1} applied innermost-last).
BackTrajectoryGrid back_trajectories(const NoisePath& path, int iteration, int grid_size);

/// Pure-transport evolution (kappa = 0): at each requested iteration n the
/// field is rho_n(node) = rho_0(phi_n^{-1}(node)).  rho_0 is evaluated
/// analytically when `analytic` is supplied, otherwise by trigonometric
/// interpolation of field0.  `record` must be sorted ascending; n = 0 returns
/// the initial field.
std::vector<SpectralScalarField> pullback_evolve(
    const SpectralScalarField& field0, const NoisePath& path, const std::vector<int>& record,
    const std::optional<AnalyticScalar>& analytic = std::nullopt);

struct McPoint {
  int t = 0;
  double value = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo estimate of the correlation Int g(x) h(Phi_t(x)) dx/(2*pi)^3
/// along one noise path.  For kappa > 0 each unit-time shear is followed by an
/// independent Gaussian kick of per-axis variance 2*kappa (wrapped), and the
/// estimator additionally averages over `n_replicas` kick realizations per
/// sample point.  Standard errors treat per-point replica means as the IID unit.
std::vector<McPoint> correlation_mc(const AnalyticScalar& g, const AnalyticScalar& h,
                                    const NoisePath& path, double kappa, int n_samples,
                                    const std::vector<int>& t_record, int n_replicas = 1);

struct DiffusiveNormPoint {
  int t = 0;
  double value = 0.0;        // truncated H^{-s} estimate (variance-debiased)
  double stderr_ = 0.0;
  double noise_floor = 0.0;  // aggregate MC uncertainty scale for the sum
  double truncation_bound = 0.0;
};

/// H^{-s} norm under diffusion via stochastic characteristics: estimates
/// rho_hat(t,k) = E Int rho_0(x) e^{-i k.Phi_t(x)} dx for all |k|_inf <=
/// k_cutoff and assembles the truncated norm.  The reported truncation bound
/// is ||rho_0||_{L^2} / (k_cutoff+1)^s, the worst-case tail weight.
std::vector<DiffusiveNormPoint> hs_norm_diffusive(const AnalyticScalar& rho0, double rho0_l2,
                                                  const NoisePath& path, double kappa,
                                                  int k_cutoff, double s, int n_samples,
                                                  const std::vector<int>& t_record);

}  // namespace abclab

#endif
