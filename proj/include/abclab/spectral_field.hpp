#ifndef ABCLAB_SPECTRAL_FIELD_HPP
#define ABCLAB_SPECTRAL_FIELD_HPP

#include "abclab/torus_map.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace abclab {

/// A named scalar on T^3 evaluable anywhere, used for initial conditions and
/// correlation observables.  Built-ins are mean free.
struct AnalyticScalar {
  std::string name;
  std::function<double(const Vec3&)> eval;
};

/// Registry lookup; throws std::invalid_argument for unknown names.
/// Built-ins: "sinx", "siny", "sinz", "cosx", "sinx+cos2y".
AnalyticScalar make_named_scalar(const std::string& name);

/// Scalar field sampled on the uniform N^3 grid x_j = 2*pi*j/N, with a lazily
/// computed discrete Fourier view rho_hat(k) for integer k in [-N/2, N/2)^3.
/// Normalization: rho_hat(k) = (2*pi)^-3 Int rho e^{-i k.x} dx, approximated
/// by the equal-weight (trapezoidal) rule, i.e. DFT / N^3.
class SpectralScalarField {
 public:
  explicit SpectralScalarField(int grid_size);
  SpectralScalarField(int grid_size, std::vector<double> values);

  int grid_size() const { return n_; }
  std::size_t node_count() const { return values_.size(); }

  double value(int ix, int iy, int iz) const { return values_[index(ix, iy, iz)]; }
  double& value(int ix, int iy, int iz) {
    dirty_ = true;
    return values_[index(ix, iy, iz)];
  }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() {
    dirty_ = true;
    return values_;
  }

  static Vec3 node(int n, int ix, int iy, int iz) {
    const double h = two_pi<double>() / n;
    return {ix * h, iy * h, iz * h};
  }

  /// Subtracts the grid mean so that rho_hat(0) = 0.
  void project_mean_free();

  /// Coefficient at integer frequency (kx, ky, kz), each in [-N/2, N/2).
  std::complex<double> coefficient(int kx, int ky, int kz) const;

  /// Full coefficient cube in DFT layout (frequency k stored at k mod N).
  const std::vector<std::complex<double>>& coefficients() const;

  /// sqrt(sum_k |rho_hat(k)|^2): the L^2 norm under the normalized measure
  /// dx/(2*pi)^3, by discrete Parseval.
  double l2_norm() const;

  /// Evaluates the trigonometric interpolant at an arbitrary point, summing
  /// modes with |coefficient| > drop_tol.  Cheap only for spectrally sparse
  /// fields; pulled-back evolution prefers analytic initial data.
  double interpolate(const Vec3& p, double drop_tol = 1e-14) const;

 private:
  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n_ + iy) * n_ + iz;
  }
  void refresh() const;

  int n_;
  std::vector<double> values_;
  mutable std::vector<std::complex<double>> coefs_;
  mutable bool dirty_ = true;
};

/// Samples a named initial condition on the N^3 grid and projects it mean
/// free.  N must be a power of two, N >= 8.
SpectralScalarField init_field(const std::string& spec, int grid_size);
SpectralScalarField init_field(const AnalyticScalar& scalar, int grid_size);

/// Homogeneous Sobolev norm sqrt(sum_{k != 0} |rho_hat(k)|^2 / |k|^{2s}).
/// s >= 0 gives the H^{-s} mix-norm; a negated exponent sign (s < 0) gives
/// the H^{+|s|} norm.
double mixing_norm(const SpectralScalarField& field, double s);

}  // namespace abclab

#endif
