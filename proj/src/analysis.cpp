#include "wtd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wtd/parallel.hpp"
#include "wtd/rng.hpp"

namespace wtd::analysis {

std::string_view to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::MaxDistance: return "max";
    case SeriesKind::AvgDistance: return "avg";
    case SeriesKind::CycleSum: return "cyclesum";
    case SeriesKind::PairingAbs: return "pairing";
    case SeriesKind::NormalizedCycleSum: return "normalized";
  }
  return "unknown";
}

SeriesKind parse_kind(std::string_view text) {
  if (text == "max" || text == "MaxDistance") return SeriesKind::MaxDistance;
  if (text == "avg" || text == "AvgDistance") return SeriesKind::AvgDistance;
  if (text == "cyclesum" || text == "CycleSum") return SeriesKind::CycleSum;
  if (text == "pairing" || text == "PairingAbs") return SeriesKind::PairingAbs;
  if (text == "normalized" || text == "NormalizedCycleSum") return SeriesKind::NormalizedCycleSum;
  throw Error(ErrorKind::Config, "unknown series kind '" + std::string(text) + "'");
}

DiffusionSeries::DiffusionSeries(SeriesKind kind, std::vector<double> x, std::vector<double> value)
    : kind_(kind) {
  if (x.size() != value.size()) throw Error(ErrorKind::Config, "series columns differ in length");
  x_.reserve(x.size());
  value_.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) push(x[i], value[i]);
}

void DiffusionSeries::push(double x, double value) {
  if (!std::isfinite(x) || !std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::Config, "series values must be finite and nonnegative");
  }
  if (!x_.empty() && !(x > x_.back())) {
    throw Error(ErrorKind::Config, "series abscissae must be strictly increasing");
  }
  if (kind_ == SeriesKind::CycleSum && !value_.empty() && value < value_.back()) {
    throw Error(ErrorKind::Config, "cycle sums must be nondecreasing");
  }
  x_.push_back(x);
  value_.push_back(value);
}

ExponentFit fit_exponent(const DiffusionSeries& series, const FitOptions& options) {
  if (series.empty()) throw Error(ErrorKind::InsufficientData, "empty series");
  double lo, hi;
  if (options.window) {
    std::tie(lo, hi) = *options.window;
  } else {
    hi = series.x().back();
    lo = hi / 100.0;
  }
  if (!(lo > 0.0) || !(hi > lo)) throw Error(ErrorKind::Config, "fit window must satisfy 0 < lo < hi");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double x = series.x()[i], v = series.value()[i];
    if (x >= lo && x <= hi && x > 0.0 && v > 0.0) {
      lx.push_back(std::log(x));
      ly.push_back(std::log(v));
    }
  }
  if (lx.size() < options.min_points) {
    throw Error(ErrorKind::InsufficientData,
                "only " + std::to_string(lx.size()) + " positive samples in the fit window");
  }
  const stats::LineFit line = stats::least_squares(lx, ly);
  ExponentFit fit;
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  fit.stderr_ = stats::bootstrap_slope_stderr(lx, ly, options.bootstrap_resamples, options.seed);
  fit.exponent = series.kind() == SeriesKind::CycleSum ? line.slope - 1.0 : line.slope;
  fit.lo = lo;
  fit.hi = hi;
  fit.points = lx.size();
  fit.seed = options.seed;
  return fit;
}

std::vector<std::uint64_t> integer_grid(double t0, double ratio, std::uint64_t n_max) {
  if (!(t0 >= 1.0) || !(ratio > 1.0)) throw Error(ErrorKind::Config, "grid needs t0 >= 1, ratio > 1");
  std::vector<std::uint64_t> grid;
  for (double v = t0; v <= static_cast<double>(n_max); v *= ratio) {
    const auto n = static_cast<std::uint64_t>(std::ceil(v - 1e-9));
    if (n > n_max) break;
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  if (n_max > 0 && (grid.empty() || grid.back() != n_max)) grid.push_back(n_max);
  return grid;
}

CycleSumAccumulator::CycleSumAccumulator(std::vector<std::uint64_t> grid) : grid_(std::move(grid)) {
  sampled_n_.reserve(grid_.size());
  sampled_.reserve(grid_.size());
}

namespace {

template <class U>
BigInt to_big(U v) {
  BigInt hi = static_cast<std::uint64_t>(v >> 64);
  return (hi << 64) + BigInt(static_cast<std::uint64_t>(v));
}

}  // namespace

bool CycleSumAccumulator::push(std::int64_t pairing_sup) {
  ++n_;
  sum_ += static_cast<u128>(pairing_sup < 0 ? -pairing_sup : pairing_sup);
  if (next_ < grid_.size() && grid_[next_] == n_) {
    sampled_n_.push_back(n_);
    sampled_.push_back(to_big(sum_));
    ++next_;
  }
  return next_ < grid_.size();
}

BigInt CycleSumAccumulator::exact_sum() const { return to_big(sum_); }

DiffusionSeries CycleSumAccumulator::series() const {
  DiffusionSeries s(SeriesKind::CycleSum);
  for (std::size_t i = 0; i < sampled_n_.size(); ++i) {
    s.push(static_cast<double>(sampled_n_[i]), sampled_[i].convert_to<double>());
  }
  return s;
}

SandwichReport sandwich_check(const DiffusionSeries& lhs, const DiffusionSeries& rhs) {
  if (lhs.size() != rhs.size()) throw Error(ErrorKind::GridMismatch, "series lengths differ");
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double a = lhs.x()[i], b = rhs.x()[i];
    if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) {
      throw Error(ErrorKind::GridMismatch, "series abscissae differ at sample " + std::to_string(i));
    }
  }
  SandwichReport report;
  report.samples = lhs.size();
  double a1 = 1.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double u = lhs.value()[i], v = rhs.value()[i];
    if (u >= 1.0 && v >= 1.0) {
      a1 = std::max({a1, u / v, v / u});
      ++report.compared;
    }
  }
  double b1 = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double u = lhs.value()[i], v = rhs.value()[i];
    b1 = std::max({b1, u - a1 * v, v / a1 - u});
  }
  report.a1_hat = a1;
  report.b1_hat = b1;
  // With the constants fitted on this run no sample can fail except through
  // rounding or non-finite constants; the check guards both.
  const double slack = 1e-9;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double u = lhs.value()[i], v = rhs.value()[i];
    const double scale = slack * (1.0 + u + v);
    const bool ok = std::isfinite(a1) && std::isfinite(b1) && u <= a1 * v + b1 + scale &&
                    u >= v / a1 - b1 - scale;
    if (!ok) report.violations.push_back(i);
  }
  return report;
}

std::pair<DiffusionSeries, DiffusionSeries> matched_billiard_series(
    std::span<const billiard::TrajectorySample> samples) {
  DiffusionSeries avg(SeriesKind::AvgDistance), normalized(SeriesKind::NormalizedCycleSum);
  for (const auto& s : samples) {
    if (s.crossings <= 0) continue;
    avg.push(s.t, s.avg_d);
    normalized.push(s.t, s.cycle_sum / static_cast<double>(s.crossings));
  }
  return {std::move(avg), std::move(normalized)};
}

ExcursionReport summarize_records(std::vector<Record> records, std::uint64_t steps) {
  ExcursionReport report;
  report.steps = steps;
  report.records = std::move(records);
  const std::size_t r = report.records.size();
  if (r < 3) {
    report.flag = "fewer than three records";
    return report;
  }
  std::vector<double> m, log_n, log_v;
  for (const auto& rec : report.records) {
    m.push_back(static_cast<double>(rec.m));
    log_n.push_back(std::log(static_cast<double>(rec.n)));
    log_v.push_back(std::log(static_cast<double>(rec.value)));
  }
  const auto value_fit = stats::least_squares(log_n, log_v);
  report.value_slope_defined = true;
  report.value_slope = value_fit.slope;
  report.value_slope_stderr = value_fit.slope_stderr;
  if (static_cast<double>(r) > std::sqrt(static_cast<double>(steps))) {
    report.flag = "records are not exponentially sparse";
    return report;
  }
  const auto beta_fit = stats::least_squares(m, log_n);
  report.beta_defined = true;
  report.beta_hat = beta_fit.slope;
  report.beta_stderr = beta_fit.slope_stderr;
  return report;
}

UniformReport uniform_upper_check(const iet::Iet<double>& map, const iet::Cocycle& f,
                                  int n_basepoints, std::uint64_t n_max, double epsilon,
                                  double lambda_hat, std::uint64_t seed, double bin_ratio) {
  if (n_basepoints < 1 || n_max < 2) throw Error(ErrorKind::Config, "need basepoints and n_max >= 2");
  UniformReport report;
  report.lambda_hat = lambda_hat;
  report.epsilon = epsilon;
  report.basepoints = n_basepoints;
  report.seed = seed;

  const std::vector<std::uint64_t> edges = integer_grid(2.0, bin_ratio, n_max);
  for (std::size_t j = 0; j < edges.size(); ++j) {
    report.bins.push_back(UniformBin{j == 0 ? 2 : edges[j - 1] + 1, edges[j],
                                     -std::numeric_limits<double>::infinity()});
  }
  // Per basepoint and bin, the largest log|pairing_n| / log n.
  const double none = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> peaks(static_cast<std::size_t>(n_basepoints));
  std::vector<char> singular(static_cast<std::size_t>(n_basepoints), 0);
  parallel_for(static_cast<std::size_t>(n_basepoints), worker_count(), [&](std::size_t b) {
    CounterRng rng(seed, b);
    iet::ReturnCycleStream<double> stream(map, f, rng.uniform() * map.total());
    auto& peak = peaks[b];
    peak.assign(edges.size(), none);
    std::size_t bin = 0;
    std::int64_t bin_best = 0;  // skip the logarithm unless |pairing| grew within the bin
    while (stream.n() < n_max) {
      if (!stream.next()) {
        singular[b] = 1;
        return;
      }
      const std::uint64_t n = stream.n();
      if (n < 2) continue;
      if (n > edges[bin]) {
        while (n > edges[bin]) ++bin;
        bin_best = 0;
      }
      const std::int64_t v = stream.pairing_sup();
      if (v <= 0 || v < bin_best) continue;
      bin_best = v;
      peak[bin] = std::max(peak[bin], std::log(static_cast<double>(v)) /
                                          std::log(static_cast<double>(n)));
    }
  });
  for (std::size_t b = 0; b < peaks.size(); ++b) {
    if (singular[b]) {
      ++report.singular_basepoints;
      continue;
    }
    for (std::size_t j = 0; j < edges.size(); ++j) {
      report.bins[j].max_ratio = std::max(report.bins[j].max_ratio, peaks[b][j]);
    }
  }
  const double bound = lambda_hat + epsilon;
  std::size_t first_good = report.bins.size();
  while (first_good > 0 && report.bins[first_good - 1].max_ratio <= bound) --first_good;
  // Require the bound on at least the last quarter of the bins to call it stable.
  report.stabilized = first_good < report.bins.size() &&
                      report.bins.size() - first_good >= std::max<std::size_t>(1, report.bins.size() / 4);
  report.n0 = first_good < report.bins.size() ? report.bins[first_good].lo : 0;
  return report;
}

}  // namespace wtd::analysis
