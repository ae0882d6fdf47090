#include "abclab/dynamo.hpp"

#include "abclab/parallel.hpp"
#include "abclab/spectral_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abclab {

MagneticInitialField make_magnetic_field(const std::string& name) {
  if (name == "constant-z") return {name, [](const Vec3&) { return Vec3(0.0, 0.0, 1.0); }};
  if (name == "constant-x") return {name, [](const Vec3&) { return Vec3(1.0, 0.0, 0.0); }};
  if (name == "abc")
    return {name, [](const Vec3& p) {
              return Vec3(std::sin(p.z()) + std::cos(p.y()), std::sin(p.x()) + std::cos(p.z()),
                          std::sin(p.y()) + std::cos(p.x()));
            }};
  throw std::invalid_argument("unknown magnetic field spec: " + name);
}

GrowthSeries magnetic_growth_series(const MagneticInitialField& b0, const NoisePath& path,
                                    double p, int grid_size, const std::vector<int>& t_record) {
  if (grid_size < 16) throw std::invalid_argument("magnetic_growth_series: grid size must be >= 16");
  if (!(p >= 1.0)) throw std::invalid_argument("magnetic_growth_series: p must be >= 1");
  if (!std::is_sorted(t_record.begin(), t_record.end()))
    throw std::invalid_argument("magnetic_growth_series: record times must be sorted ascending");
  if (!t_record.empty() && t_record.back() > static_cast<int>(path.size()))
    throw std::invalid_argument("magnetic_growth_series: record time beyond path length");

  const std::size_t nodes =
      static_cast<std::size_t>(grid_size) * grid_size * grid_size;
  std::vector<Vec3> pos(nodes), vec(nodes);
  double max_b0 = 0.0;
  for (int ix = 0; ix < grid_size; ++ix)
    for (int iy = 0; iy < grid_size; ++iy)
      for (int iz = 0; iz < grid_size; ++iz) {
        const std::size_t i = (static_cast<std::size_t>(ix) * grid_size + iy) * grid_size + iz;
        pos[i] = SpectralScalarField::node(grid_size, ix, iy, iz);
        vec[i] = b0.eval(pos[i]);
        max_b0 = std::max(max_b0, vec[i].norm());
      }
  if (max_b0 == 0.0) throw std::invalid_argument("magnetic_growth_series: zero initial field");

  GrowthSeries series;
  series.p = p;
  series.grid_size = grid_size;

  std::vector<double> node_norm(nodes);
  const auto record_now = [&](int t) {
    parallel_for_index(nodes, [&](std::size_t i) { node_norm[i] = vec[i].norm(); });
    double norm;
    if (std::isinf(p)) {
      norm = *std::max_element(node_norm.begin(), node_norm.end());
    } else {
      double sum = 0.0;  // fixed-order reduction
      for (std::size_t i = 0; i < nodes; ++i) sum += std::pow(node_norm[i], p);
      norm = std::pow(sum / static_cast<double>(nodes), 1.0 / p);
    }
    series.iterations.push_back(t);
    series.norms.push_back(norm);
  };

  std::size_t rec = 0;
  const std::size_t n_rec = t_record.size();
  for (int t = 0; rec < n_rec; ++t) {
    while (rec < n_rec && t_record[rec] == t) {
      record_now(t);
      ++rec;
    }
    if (rec >= n_rec) break;
    const NoiseSample& w = path[t];
    parallel_for_index(nodes, [&](std::size_t i) {
      vec[i] = jacobian_step<double>(pos[i], w) * vec[i];
      pos[i] = step<double>(pos[i], w);
    });
  }
  return series;
}

std::pair<double, double> frobenius_bound_margin(const Mat3& m, const Vec3& w) {
  const double lhs = (m * w).norm();
  const double fro2 = m.squaredNorm();
  const double rhs = std::sqrt(2.0) * std::abs(m.determinant()) / fro2 * w.norm();
  return {lhs, rhs};
}

DynamoRateReport dynamo_rate(const GrowthSeries& series, int n0, int n1,
                             const LyapunovEstimate& lambda1) {
  // map iteration window to series indices
  const auto idx_of = [&](int t) {
    const auto it = std::find(series.iterations.begin(), series.iterations.end(), t);
    if (it == series.iterations.end())
      throw std::invalid_argument("dynamo_rate: window endpoint not in recorded iterations");
    return static_cast<int>(it - series.iterations.begin());
  };
  const int i0 = idx_of(n0), i1 = idx_of(n1);
  for (int i = i0; i < i1; ++i)
    if (series.iterations[i + 1] - series.iterations[i] != 1)
      throw std::invalid_argument("dynamo_rate: window must cover consecutive iterations");
  DynamoRateReport rep;
  rep.fit = fit_exponential_rate(series.norms, i0, i1, series.iterations[i0] - i0);
  rep.lambda1 = lambda1.lambda;
  rep.lambda1_stderr = lambda1.stderr_;
  rep.combined_stderr =
      std::sqrt(rep.fit.rate_stderr * rep.fit.rate_stderr + lambda1.stderr_ * lambda1.stderr_);
  rep.eta_at_least_lambda1 = rep.fit.rate >= rep.lambda1 - 3.0 * rep.combined_stderr;
  return rep;
}

}  // namespace abclab
