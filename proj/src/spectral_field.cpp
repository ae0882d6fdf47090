#include "abclab/spectral_field.hpp"

#include "abclab/parallel.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <stdexcept>

namespace abclab {

AnalyticScalar make_named_scalar(const std::string& name) {
  if (name == "sinx") return {name, [](const Vec3& p) { return std::sin(p.x()); }};
  if (name == "siny") return {name, [](const Vec3& p) { return std::sin(p.y()); }};
  if (name == "sinz") return {name, [](const Vec3& p) { return std::sin(p.z()); }};
  if (name == "cosx") return {name, [](const Vec3& p) { return std::cos(p.x()); }};
  if (name == "sinx+cos2y")
    return {name, [](const Vec3& p) { return std::sin(p.x()) + std::cos(2.0 * p.y()); }};
  throw std::invalid_argument("unknown scalar spec: " + name);
}

SpectralScalarField::SpectralScalarField(int grid_size)
    : n_(grid_size),
      values_(static_cast<std::size_t>(grid_size) * grid_size * grid_size, 0.0) {
  if (grid_size < 2) throw std::invalid_argument("SpectralScalarField: grid too small");
}

SpectralScalarField::SpectralScalarField(int grid_size, std::vector<double> values)
    : n_(grid_size), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(n_) * n_ * n_)
    throw std::invalid_argument("SpectralScalarField: value count does not match grid");
}

void SpectralScalarField::project_mean_free() {
  double mean = 0.0;
  for (double v : values_) mean += v;
  mean /= static_cast<double>(values_.size());
  for (double& v : values_) v -= mean;
  dirty_ = true;
}

namespace {

// 3-d c2c DFT composed from 1-d passes along each axis (z contiguous).
void dft3_forward(const std::vector<double>& values, int n,
                  std::vector<std::complex<double>>& out) {
  using C = std::complex<double>;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  out.assign(total, C(0.0, 0.0));
  for (std::size_t i = 0; i < total; ++i) out[i] = C(values[i], 0.0);

  const std::size_t plane = static_cast<std::size_t>(n) * n;
  parallel_for_index(plane, [&](std::size_t xy) {
    Eigen::FFT<double> fft;
    std::vector<C> line(n), spec(n);
    // z axis: contiguous
    C* base = out.data() + xy * n;
    std::copy(base, base + n, line.begin());
    fft.fwd(spec, line);
    std::copy(spec.begin(), spec.end(), base);
  });
  parallel_for_index(plane, [&](std::size_t xz) {
    Eigen::FFT<double> fft;
    std::vector<C> line(n), spec(n);
    const std::size_t ix = xz / n, iz = xz % n;
    // y axis: stride n
    for (int iy = 0; iy < n; ++iy) line[iy] = out[(ix * n + iy) * n + iz];
    fft.fwd(spec, line);
    for (int iy = 0; iy < n; ++iy) out[(ix * n + iy) * n + iz] = spec[iy];
  });
  parallel_for_index(plane, [&](std::size_t yz) {
    Eigen::FFT<double> fft;
    std::vector<C> line(n), spec(n);
    const std::size_t iy = yz / n, iz = yz % n;
    // x axis: stride n^2
    for (int ix = 0; ix < n; ++ix) line[ix] = out[(static_cast<std::size_t>(ix) * n + iy) * n + iz];
    fft.fwd(spec, line);
    for (int ix = 0; ix < n; ++ix) out[(static_cast<std::size_t>(ix) * n + iy) * n + iz] = spec[ix];
  });
}

}  // namespace

void SpectralScalarField::refresh() const {
  if (!dirty_) return;
  dft3_forward(values_, n_, coefs_);
  const double scale = 1.0 / static_cast<double>(values_.size());
  for (auto& c : coefs_) c *= scale;
  dirty_ = false;
}

const std::vector<std::complex<double>>& SpectralScalarField::coefficients() const {
  refresh();
  return coefs_;
}

std::complex<double> SpectralScalarField::coefficient(int kx, int ky, int kz) const {
  refresh();
  const auto fold = [this](int k) { return (k % n_ + n_) % n_; };
  return coefs_[(static_cast<std::size_t>(fold(kx)) * n_ + fold(ky)) * n_ + fold(kz)];
}

double SpectralScalarField::l2_norm() const {
  refresh();
  double sum = 0.0;
  for (const auto& c : coefs_) sum += std::norm(c);
  return std::sqrt(sum);
}

double SpectralScalarField::interpolate(const Vec3& p, double drop_tol) const {
  refresh();
  const int half = n_ / 2;
  std::complex<double> acc(0.0, 0.0);
  for (int kx = -half; kx < half; ++kx)
    for (int ky = -half; ky < half; ++ky)
      for (int kz = -half; kz < half; ++kz) {
        const std::complex<double> c = coefficient(kx, ky, kz);
        if (std::abs(c) <= drop_tol) continue;
        const double phase = kx * p.x() + ky * p.y() + kz * p.z();
        acc += c * std::complex<double>(std::cos(phase), std::sin(phase));
      }
  return acc.real();
}

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

SpectralScalarField init_field(const AnalyticScalar& scalar, int grid_size) {
  if (!power_of_two(grid_size) || grid_size < 8)
    throw std::invalid_argument("init_field: grid size must be a power of two, >= 8");
  SpectralScalarField field(grid_size);
  auto& vals = field.mutable_values();
  const std::size_t n = grid_size;
  parallel_for_index(n * n, [&](std::size_t xy) {
    const int ix = static_cast<int>(xy / n), iy = static_cast<int>(xy % n);
    for (int iz = 0; iz < grid_size; ++iz)
      vals[(xy)*n + iz] = scalar.eval(SpectralScalarField::node(grid_size, ix, iy, iz));
  });
  field.project_mean_free();
  return field;
}

SpectralScalarField init_field(const std::string& spec, int grid_size) {
  return init_field(make_named_scalar(spec), grid_size);
}

double mixing_norm(const SpectralScalarField& field, double s) {
  const int n = field.grid_size();
  const int half = n / 2;
  const auto& coefs = field.coefficients();
  double sum = 0.0;
  for (int ix = 0; ix < n; ++ix) {
    const int kx = ix < half ? ix : ix - n;
    for (int iy = 0; iy < n; ++iy) {
      const int ky = iy < half ? iy : iy - n;
      for (int iz = 0; iz < n; ++iz) {
        const int kz = iz < half ? iz : iz - n;
        const double k2 = double(kx) * kx + double(ky) * ky + double(kz) * kz;
        if (k2 == 0.0) continue;
        const double w = std::pow(k2, -s);  // |k|^{-2s}
        sum += w * std::norm(coefs[(static_cast<std::size_t>(ix) * n + iy) * n + iz]);
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace abclab
