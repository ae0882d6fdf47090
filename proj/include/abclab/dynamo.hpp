#ifndef ABCLAB_DYNAMO_HPP
#define ABCLAB_DYNAMO_HPP

#include "abclab/lyapunov.hpp"
#include "abclab/noise.hpp"
#include "abclab/stats.hpp"
#include "abclab/torus_map.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace abclab {

/// Divergence-free initial vector field on T^3, evaluable pointwise.
/// Built-ins: "constant-z" = (0,0,1); "abc" = the Beltrami field with unit
/// coefficients (sin z + cos y, sin x + cos z, sin y + cos x).
struct MagneticInitialField {
  std::string name;
  std::function<Vec3(const Vec3&)> eval;
};

MagneticInitialField make_magnetic_field(const std::string& name);

constexpr double kPInfinity = std::numeric_limits<double>::infinity();

struct GrowthSeries {
  double p = 1.0;
  int grid_size = 0;
  std::vector<int> iterations;
  std::vector<double> norms;  // ||B(n)||_p under the normalized measure
};

/// ||B(n)||_p^p = Int |D_x phi_n B_0(x)|^p dx/(2*pi)^3 by change of variables
/// (the flow preserves volume): quadrature over the N^3 grid of starting
/// points, each carrying its cocycle-stretched vector.  p = infinity returns
/// the grid max.  Throws on an identically zero field.
GrowthSeries magnetic_growth_series(const MagneticInitialField& b0, const NoisePath& path,
                                    double p, int grid_size, const std::vector<int>& t_record);

/// Matrix lower bound |M w| >= sqrt(2) |det M| / ||M||_F^2 |w| in dimension 3.
/// Returns (lhs, rhs).
std::pair<double, double> frobenius_bound_margin(const Mat3& m, const Vec3& w);

struct DynamoRateReport {
  RateFit fit;
  double lambda1 = 0.0;
  double lambda1_stderr = 0.0;
  double combined_stderr = 0.0;
  bool eta_at_least_lambda1 = false;  // fitted rate >= lambda1 - 3 * combined stderr
};

/// Exponential fit of the growth series over the inclusive iteration window
/// [n0, n1], compared against a supplied top-Lyapunov estimate.
DynamoRateReport dynamo_rate(const GrowthSeries& series, int n0, int n1,
                             const LyapunovEstimate& lambda1);

}  // namespace abclab

#endif
