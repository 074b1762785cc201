#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wtd::stats {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;  // classical OLS standard error
  double r2 = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x. Requires n >= 2 and
/// non-constant x.
LineFit least_squares(std::span<const double> x, std::span<const double> y);

/// Standard deviation of the OLS slope over `resamples` pairs-bootstrap draws.
double bootstrap_slope_stderr(std::span<const double> x, std::span<const double> y,
                              int resamples, std::uint64_t seed);

double median(std::vector<double> values);

double bootstrap_median_stderr(std::span<const double> values, int resamples,
                               std::uint64_t seed);

/// Mean and standard error of the mean from non-overlapping batch means;
/// robust to serial correlation in `values`.
struct BatchMean {
  double mean = 0.0;
  double stderr_ = 0.0;
};
BatchMean batch_mean(std::span<const double> values, int batches);

/// Geometric grid t0 * ratio^j, j = 0,1,..., up to and including the last
/// point <= t_max.
std::vector<double> geometric_grid(double t0, double ratio, double t_max);

}  // namespace wtd::stats
