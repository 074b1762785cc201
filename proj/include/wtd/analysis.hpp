#pragma once

// Series-level analysis: cycle sums of return-cycle pairings, log-log exponent
// fits, the sandwich comparison between time averages and normalized cycle
// sums, excursion records and the uniform upper bound check.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wtd/billiard.hpp"
#include "wtd/error.hpp"
#include "wtd/iet.hpp"
#include "wtd/rational.hpp"
#include "wtd/stats.hpp"

namespace wtd::analysis {

enum class SeriesKind { MaxDistance, AvgDistance, CycleSum, PairingAbs, NormalizedCycleSum };

std::string_view to_string(SeriesKind kind);
/// Accepts "max", "avg", "cyclesum", "pairing", "normalized" (and the enum names).
SeriesKind parse_kind(std::string_view text);

/// (abscissa, value) pairs with strictly increasing abscissae and nonnegative
/// values; CycleSum series are also nondecreasing.
class DiffusionSeries {
 public:
  explicit DiffusionSeries(SeriesKind kind) : kind_(kind) {}
  DiffusionSeries(SeriesKind kind, std::vector<double> x, std::vector<double> value);

  void push(double x, double value);

  SeriesKind kind() const { return kind_; }
  std::size_t size() const { return x_.size(); }
  bool empty() const { return x_.empty(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& value() const { return value_; }

 private:
  SeriesKind kind_;
  std::vector<double> x_;
  std::vector<double> value_;
};

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;  // bootstrap standard error of the slope
  double r2 = 0.0;
  /// slope - 1 for CycleSum series (the 1/n normalization), slope otherwise.
  double exponent = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t points = 0;
  std::uint64_t seed = 0;
};

struct FitOptions {
  /// Abscissa window; defaults to the last two decades of the series.
  std::optional<std::pair<double, double>> window;
  int bootstrap_resamples = 200;
  std::uint64_t seed = 0;
  std::size_t min_points = 20;
};

/// Least squares on (log x, log value) over positive samples inside the
/// window. Throws InsufficientData with fewer than min_points samples.
ExponentFit fit_exponent(const DiffusionSeries& series, const FitOptions& options = {});

/// Geometric grid of distinct integers ceil(t0 * ratio^j) <= n_max, always
/// ending with n_max.
std::vector<std::uint64_t> integer_grid(double t0, double ratio, std::uint64_t n_max);

/// Streaming S_n = sum_{k <= n} max_i |<f_i, C_k>|, with an exact integer
/// accumulator, sampled on a grid of n.
class CycleSumAccumulator {
 public:
  explicit CycleSumAccumulator(std::vector<std::uint64_t> grid);

  /// Adds the k-th term (k = 1, 2, ...). Returns true while grid points remain.
  bool push(std::int64_t pairing_sup);

  std::uint64_t n() const { return n_; }
  BigInt exact_sum() const;
  const std::vector<std::uint64_t>& sampled_n() const { return sampled_n_; }
  const std::vector<BigInt>& sampled_sums() const { return sampled_; }
  DiffusionSeries series() const;

 private:
  __extension__ using u128 = unsigned __int128;

  std::vector<std::uint64_t> grid_;
  std::size_t next_ = 0;
  std::uint64_t n_ = 0;
  u128 sum_ = 0;
  std::vector<std::uint64_t> sampled_n_;
  std::vector<BigInt> sampled_;
};

struct CycleSumRun {
  DiffusionSeries series{SeriesKind::CycleSum};
  std::vector<std::uint64_t> n;
  std::vector<BigInt> exact;  // S_n at the sampled n
  std::uint64_t steps = 0;
  std::optional<std::uint64_t> singular_at;
};

struct GridOptions {
  double t0 = 1.0;
  double ratio = 1.05;
};

/// Runs the return-cycle stream of x for n_max steps and accumulates the
/// cycle sums. A singular orbit ends the run early (singular_at is set).
template <class T>
CycleSumRun cycle_sums(const iet::Iet<T>& map, const iet::Cocycle& f, T x, std::uint64_t n_max,
                       const GridOptions& grid = {});

struct SandwichReport {
  double a1_hat = 1.0;
  double b1_hat = 0.0;
  std::vector<std::size_t> violations;  // sample indices violating the fitted sandwich
  std::size_t samples = 0;
  std::size_t compared = 0;  // samples with both sides >= 1 used to fit A1
};

/// Smallest A1 >= 1 and then B1 >= 0 with
///   lhs / A1 - B1 <= rhs <= A1 * lhs + B1   (equivalently for lhs in terms of rhs)
/// at every common sample: A1 is the largest ratio max(lhs/rhs, rhs/lhs) over
/// samples where both sides are >= 1, B1 absorbs the remaining samples.
/// Throws GridMismatch if the abscissae differ.
SandwichReport sandwich_check(const DiffusionSeries& lhs, const DiffusionSeries& rhs);

/// The time average avg_d(t) and the normalized cycle sum S_{n(t)} / n(t) of
/// the cell-crossing cross-section, on the samples of one billiard run
/// (samples before the first crossing are dropped from both).
std::pair<DiffusionSeries, DiffusionSeries> matched_billiard_series(
    std::span<const billiard::TrajectorySample> samples);

struct Record {
  std::uint64_t m = 0;  // record index, 1-based
  std::uint64_t n = 0;
  std::int64_t value = 0;  // max_i |<f_i, C_n>|, a new running maximum
};

struct ExcursionReport {
  std::vector<Record> records;
  std::uint64_t steps = 0;
  std::optional<std::uint64_t> singular_at;
  bool beta_defined = false;
  double beta_hat = 0.0;  // slope of log n_m against m
  double beta_stderr = 0.0;
  bool value_slope_defined = false;
  double value_slope = 0.0;  // slope of log value_m against log n_m
  double value_slope_stderr = 0.0;
  std::string flag;  // reason when a slope is undefined
};

/// Running-maximum records of max_i |<f_i, C_n(x)>| over n <= n_max. The
/// record times must be exponentially sparse for beta_hat to be meaningful:
/// runs with more than sqrt(n_max) records are flagged. Throws
/// InsufficientData for n_max < 1000.
template <class T>
ExcursionReport excursion_records(const iet::Iet<T>& map, const iet::Cocycle& f, T x,
                                  std::uint64_t n_max);

/// Builds the report from an already computed record list.
ExcursionReport summarize_records(std::vector<Record> records, std::uint64_t steps);

struct UniformBin {
  std::uint64_t lo = 0;  // bin is (previous hi, hi], lo is its first n
  std::uint64_t hi = 0;
  double max_ratio = 0.0;  // max over basepoints and n in the bin of log|p_n| / log n
};

struct UniformReport {
  std::vector<UniformBin> bins;
  double lambda_hat = 0.0;
  double epsilon = 0.0;
  bool stabilized = false;
  std::uint64_t n0 = 0;  // first n after which every bin satisfies the bound
  int basepoints = 0;
  int singular_basepoints = 0;
  std::uint64_t seed = 0;
};

/// Samples basepoints uniformly, runs each orbit to n_max and records, per
/// geometric bin of n starting at 2, the largest log|pairing_n| / log n.
/// Reports the empirical N0 beyond which the bound lambda_hat + epsilon holds.
UniformReport uniform_upper_check(const iet::Iet<double>& map, const iet::Cocycle& f,
                                  int n_basepoints, std::uint64_t n_max, double epsilon,
                                  double lambda_hat, std::uint64_t seed, double bin_ratio = 1.25);

// ---------------------------------------------------------------------------

template <class T>
CycleSumRun cycle_sums(const iet::Iet<T>& map, const iet::Cocycle& f, T x, std::uint64_t n_max,
                       const GridOptions& grid) {
  CycleSumAccumulator acc(integer_grid(grid.t0, grid.ratio, n_max));
  iet::ReturnCycleStream<T> stream(map, f, std::move(x));
  CycleSumRun run;
  while (stream.n() < n_max) {
    if (!stream.next()) {
      run.singular_at = stream.singular_at();
      break;
    }
    acc.push(stream.pairing_sup());
  }
  run.steps = stream.n();
  run.series = acc.series();
  run.n = acc.sampled_n();
  run.exact = acc.sampled_sums();
  return run;
}

template <class T>
ExcursionReport excursion_records(const iet::Iet<T>& map, const iet::Cocycle& f, T x,
                                  std::uint64_t n_max) {
  if (n_max < 1000) throw Error(ErrorKind::InsufficientData, "excursion records need n >= 1000");
  iet::ReturnCycleStream<T> stream(map, f, std::move(x));
  std::vector<Record> records;
  std::int64_t best = 0;
  std::optional<std::uint64_t> singular;
  while (stream.n() < n_max) {
    if (!stream.next()) {
      singular = stream.singular_at();
      break;
    }
    const std::int64_t v = stream.pairing_sup();
    if (v > best) {
      best = v;
      records.push_back(Record{records.size() + 1, stream.n(), v});
    }
  }
  ExcursionReport report = summarize_records(std::move(records), stream.n());
  report.singular_at = singular;
  return report;
}

}  // namespace wtd::analysis
