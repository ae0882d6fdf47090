#include "abclab/stats.hpp"

#include <unsupported/Eigen/SpecialFunctions>

#include <cmath>
#include <stdexcept>

namespace abclab {

MeanStderr batch_mean_stderr(std::span<const double> values, int target_batches) {
  MeanStderr out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / static_cast<double>(n);
  const int nb = static_cast<int>(std::min<std::size_t>(target_batches, n));
  if (nb < 2) return out;
  std::vector<double> means(nb, 0.0);
  // Contiguous batches; sizes differ by at most one.
  std::size_t begin = 0;
  for (int b = 0; b < nb; ++b) {
    const std::size_t end = n * (b + 1) / nb;
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += values[i];
    means[b] = s / static_cast<double>(end - begin);
    begin = end;
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= nb;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (nb - 1);
  out.stderr_ = std::sqrt(var / nb);
  out.batches = nb;
  return out;
}

RateFit fit_exponential_rate(std::span<const double> series, int n0, int n1, int t0) {
  if (n0 < 0 || n1 >= static_cast<int>(series.size()) || n1 < n0)
    throw std::invalid_argument("fit_exponential_rate: window out of range");
  const int n = n1 - n0 + 1;
  double st = 0.0, sy = 0.0;
  for (int i = n0; i <= n1; ++i) {
    if (!(series[i] > 0.0))
      throw std::invalid_argument("fit_exponential_rate: nonpositive value inside window");
    st += t0 + i;
    sy += std::log(series[i]);
  }
  const double tbar = st / n, ybar = sy / n;
  double stt = 0.0, sty = 0.0;
  for (int i = n0; i <= n1; ++i) {
    const double dt = (t0 + i) - tbar;
    stt += dt * dt;
    sty += dt * (std::log(series[i]) - ybar);
  }
  RateFit fit;
  fit.window_begin = t0 + n0;
  fit.window_end = t0 + n1;
  if (stt == 0.0) {  // single point
    fit.rate = 0.0;
    fit.intercept = series[n0];
    return fit;
  }
  fit.rate = sty / stt;
  const double b = ybar - fit.rate * tbar;
  fit.intercept = std::exp(b);
  double ssr = 0.0, sst = 0.0;
  for (int i = n0; i <= n1; ++i) {
    const double y = std::log(series[i]);
    const double resid = y - (b + fit.rate * (t0 + i));
    ssr += resid * resid;
    sst += (y - ybar) * (y - ybar);
  }
  fit.r2 = (sst < 1e-300) ? 1.0 : 1.0 - ssr / sst;
  if (n > 2) fit.rate_stderr = std::sqrt(ssr / (n - 2) / stt);
  return fit;
}

double chi_square_pvalue(double stat, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("chi_square_pvalue: dof must be > 0");
  Eigen::Array<double, 1, 1> a, x;
  a(0) = dof / 2.0;
  x(0) = stat / 2.0;
  return Eigen::igammac(a, x)(0);
}

}  // namespace abclab
