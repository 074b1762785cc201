#include "wtd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wtd/error.hpp"
#include "wtd/rng.hpp"

namespace wtd::stats {

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) {
    throw Error(ErrorKind::InsufficientData, "least squares needs at least two paired points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientData, "abscissae are all equal");

  LineFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ssr = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.slope_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

double bootstrap_slope_stderr(std::span<const double> x, std::span<const double> y,
                              int resamples, std::uint64_t seed) {
  const std::size_t n = x.size();
  if (n < 3 || resamples < 2) return 0.0;
  CounterRng rng(seed, 0x5107e);
  std::vector<double> bx(n), by(n), slopes;
  slopes.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.below(n));
      bx[i] = x[j];
      by[i] = y[j];
    }
    try {
      slopes.push_back(least_squares(bx, by).slope);
    } catch (const Error&) {
      // degenerate draw (all abscissae equal); skip it
    }
  }
  if (slopes.size() < 2) return 0.0;
  double m = 0.0;
  for (double s : slopes) m += s;
  m /= static_cast<double>(slopes.size());
  double v = 0.0;
  for (double s : slopes) v += (s - m) * (s - m);
  return std::sqrt(v / static_cast<double>(slopes.size() - 1));
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InsufficientData, "median of empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double bootstrap_median_stderr(std::span<const double> values, int resamples,
                               std::uint64_t seed) {
  const std::size_t n = values.size();
  if (n < 2 || resamples < 2) return 0.0;
  CounterRng rng(seed, 0x3ed1a);
  std::vector<double> draw(n), medians;
  medians.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < n; ++i) draw[i] = values[static_cast<std::size_t>(rng.below(n))];
    medians.push_back(median(draw));
  }
  double m = 0.0;
  for (double v : medians) m += v;
  m /= static_cast<double>(medians.size());
  double var = 0.0;
  for (double v : medians) var += (v - m) * (v - m);
  return std::sqrt(var / static_cast<double>(medians.size() - 1));
}

BatchMean batch_mean(std::span<const double> values, int batches) {
  BatchMean out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  double total = 0.0;
  for (double v : values) total += v;
  out.mean = total / static_cast<double>(n);
  const auto b = static_cast<std::size_t>(std::max(2, batches));
  const std::size_t len = n / b;
  if (len == 0) return out;
  std::vector<double> means;
  for (std::size_t i = 0; i < b; ++i) {
    double s = 0.0;
    for (std::size_t j = i * len; j < (i + 1) * len; ++j) s += values[j];
    means.push_back(s / static_cast<double>(len));
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(b);
  double var = 0.0;
  for (double v : means) var += (v - m) * (v - m);
  var /= static_cast<double>(b - 1);
  out.stderr_ = std::sqrt(var / static_cast<double>(b));
  return out;
}

std::vector<double> geometric_grid(double t0, double ratio, double t_max) {
  if (!(t0 > 0.0) || !(ratio > 1.0)) {
    throw Error(ErrorKind::Config, "geometric grid needs t0 > 0 and ratio > 1");
  }
  std::vector<double> grid;
  for (int j = 0;; ++j) {
    const double t = t0 * std::pow(ratio, j);
    if (t > t_max * (1.0 + 1e-12)) break;
    grid.push_back(t);
  }
  return grid;
}

}  // namespace wtd::stats
