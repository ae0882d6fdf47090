#ifndef ABCLAB_STATS_HPP
#define ABCLAB_STATS_HPP

#include <span>
#include <vector>

namespace abclab {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  int batches = 0;
};

/// Batch-means estimate: values are grouped (in order) into up to
/// `target_batches` contiguous batches; the standard error is that of the
/// batch means.  For autocorrelated series this avoids the understated
/// errors a naive IID formula would give.
MeanStderr batch_mean_stderr(std::span<const double> values, int target_batches = 20);

/// Exponential-rate fit of a positive series sampled at integer times.
struct RateFit {
  double rate = 0.0;        // slope of log(value) per time unit
  double intercept = 1.0;   // multiplicative constant exp(b), i.e. fitted value at t = 0
  double r2 = 1.0;          // 1 for zero-variance residuals
  double rate_stderr = 0.0; // OLS slope standard error (0 when dof <= 0)
  int window_begin = 0;
  int window_end = 0;
};

/// OLS on (t, log value) over the inclusive index window [n0, n1]; series[i]
/// is the value at time t = t0 + i.  Throws std::invalid_argument on a
/// nonpositive value inside the window or a malformed window.
RateFit fit_exponential_rate(std::span<const double> series, int n0, int n1, int t0 = 0);

/// Upper-tail chi-square probability Q(dof/2, stat/2).
double chi_square_pvalue(double stat, double dof);

}  // namespace abclab

#endif
