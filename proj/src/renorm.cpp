#include "wtd/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wtd/stats.hpp"

namespace wtd::renorm {

TransitionMatrix::TransitionMatrix(std::size_t k) : k_(k), entries_(k * k, BigInt(0)) {
  for (std::size_t i = 0; i < k; ++i) entries_[i * k + i] = 1;
}

TransitionMatrix TransitionMatrix::elementary(std::size_t k, Letter row, Letter col) {
  TransitionMatrix m(k);
  m(row, col) += 1;
  return m;
}

TransitionMatrix TransitionMatrix::operator*(const TransitionMatrix& rhs) const {
  if (rhs.k_ != k_) throw Error(ErrorKind::Config, "matrix sizes differ");
  TransitionMatrix out(k_);
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = 0; j < k_; ++j) {
      BigInt acc = 0;
      for (std::size_t m = 0; m < k_; ++m) acc += (*this)(i, m) * rhs(m, j);
      out(i, j) = std::move(acc);
    }
  }
  return out;
}

BigInt TransitionMatrix::determinant() const {
  std::vector<BigInt> a = entries_;
  const std::size_t n = k_;
  int sign = 1;
  BigInt prev = 1;
  for (std::size_t p = 0; p < n; ++p) {
    if (a[p * n + p].is_zero()) {
      std::size_t r = p + 1;
      while (r < n && a[r * n + p].is_zero()) ++r;
      if (r == n) return 0;
      for (std::size_t c = 0; c < n; ++c) std::swap(a[p * n + c], a[r * n + c]);
      sign = -sign;
    }
    for (std::size_t i = p + 1; i < n; ++i) {
      for (std::size_t j = p + 1; j < n; ++j) {
        a[i * n + j] = (a[i * n + j] * a[p * n + p] - a[i * n + p] * a[p * n + j]) / prev;
      }
    }
    prev = a[p * n + p];
  }
  return sign * a[(n - 1) * n + (n - 1)];
}

bool TransitionMatrix::nonnegative() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const BigInt& v) { return v.sign() >= 0; });
}

std::vector<BigInt> TransitionMatrix::column_sums() const {
  std::vector<BigInt> out(k_, BigInt(0));
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = 0; j < k_; ++j) out[j] += (*this)(i, j);
  }
  return out;
}

namespace {

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Slope {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Regression slope of a cumulative series over its last half, with a batch
// means standard error from the per-step increments.
Slope tail_slope(const std::vector<double>& cumulative, int batches) {
  const std::size_t n = cumulative.size();
  const std::size_t from = n / 2;
  std::vector<double> x, y, inc;
  for (std::size_t i = from; i < n; ++i) {
    x.push_back(static_cast<double>(i + 1));
    y.push_back(cumulative[i]);
    if (i > 0) inc.push_back(cumulative[i] - cumulative[i - 1]);
  }
  Slope s;
  s.value = stats::least_squares(x, y).slope;
  s.stderr_ = stats::batch_mean(inc, batches).stderr_;
  return s;
}

}  // namespace

LyapunovResult lyapunov_ratio(const Iet<double>& start, const iet::Cocycle& f,
                              const LyapunovOptions& options) {
  const std::size_t k = start.size();
  const std::size_t d = f.dim();
  if (f.letters() != k) throw Error(ErrorKind::Config, "cocycle and interval exchange differ");
  if (options.steps < 4) throw Error(ErrorKind::InsufficientData, "need at least 4 Zorich steps");
  if (f.is_zero()) {
    throw Error(ErrorKind::Degenerate, "the zero cocycle lies in the kernel of every product");
  }

  std::vector<Letter> top = start.top();
  std::vector<Letter> bottom = start.bottom();
  std::vector<double> lengths = start.lengths();
  double total = start.total();

  LyapunovResult out;
  out.projected.assign(d, false);
  std::vector<std::vector<double>> w(d, std::vector<double>(k));
  std::vector<std::vector<double>> log_w(d);
  for (std::size_t i = 0; i < d; ++i) {
    double mean = 0.0, scale = 0.0;
    for (Letter a = 0; a < k; ++a) {
      w[i][a] = static_cast<double>(f.value(a, i));
      mean += w[i][a] * lengths[a];
      scale += std::abs(w[i][a]) * lengths[a];
    }
    out.projected[i] = options.project_when_balanced && scale > 0.0 &&
                       std::abs(mean) <= 1e-12 * scale;
  }
  std::vector<double> h(k, 1.0);
  std::vector<double> log_h;
  std::vector<double> acc_w(d, 0.0);
  double acc_h = 0.0;
  double scale_acc = 0.0;

  for (std::uint64_t step = 0; step < options.steps; ++step) {
    const bool type = detail::next_type(top, bottom, lengths, total);
    std::uint64_t count = 0;
    const double before = total;
    do {
      const detail::MoveInfo m = detail::rauzy_move<double>(top, bottom, lengths, nullptr, total);
      for (auto& wi : w) wi[m.loser] += wi[m.winner];
      h[m.loser] += h[m.winner];
      if (++count > options.max_block) {
        throw Error(ErrorKind::ConnectionEncountered, "Zorich block exceeds the step cap");
      }
    } while (detail::next_type(top, bottom, lengths, total) == type);
    out.rauzy_steps += count;
    total = detail::sum(lengths);
    for (auto& l : lengths) l /= total;
    scale_acc += std::log(before) - std::log(total);
    total = 1.0;
    out.log_scale.push_back(scale_acc);

    const double nh = sup_norm(h);
    for (auto& v : h) v /= nh;
    acc_h += std::log(nh);
    log_h.push_back(acc_h);
    const double h_lambda = dot(h, lengths);
    for (std::size_t i = 0; i < d; ++i) {
      if (out.projected[i]) {
        const double c = dot(w[i], lengths) / h_lambda;
        for (Letter a = 0; a < k; ++a) w[i][a] -= c * h[a];
      }
      const double nw = sup_norm(w[i]);
      if (!(nw > 0.0) || !std::isfinite(nw)) {
        throw Error(ErrorKind::Degenerate, "cocycle vector collapsed to zero");
      }
      for (auto& v : w[i]) v /= nw;
      acc_w[i] += std::log(nw);
      log_w[i].push_back(acc_w[i]);
    }
  }

  out.zorich_steps = options.steps;
  const Slope top_slope = tail_slope(log_h, options.batches);
  out.lambda_top = top_slope.value;
  out.lambda_top_stderr = top_slope.stderr_;
  out.mean_log_increment = scale_acc / static_cast<double>(options.steps);

  // Per-batch ratios of the summed increments give the ratio's standard error.
  const std::size_t n = log_h.size();
  const std::size_t from = n / 2;
  const std::size_t batches = static_cast<std::size_t>(std::max(2, options.batches));
  const std::size_t per = std::max<std::size_t>(1, (n - from) / batches);

  out.ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d; ++i) {
    const Slope s = tail_slope(log_w[i], options.batches);
    out.lambda_f.push_back(s.value);
    out.lambda_f_stderr.push_back(s.stderr_);
    const double r = s.value / out.lambda_top;
    out.component_ratio.push_back(r);
    if (r > out.ratio) {
      out.ratio = r;
      std::vector<double> batch_ratios;
      for (std::size_t b = 0; b + 1 <= batches && from + (b + 1) * per <= n; ++b) {
        const std::size_t lo = from + b * per;
        const std::size_t hi = lo + per - 1;
        const double dw = log_w[i][hi] - (lo > 0 ? log_w[i][lo - 1] : 0.0);
        const double dh = log_h[hi] - (lo > 0 ? log_h[lo - 1] : 0.0);
        batch_ratios.push_back(dw / dh);
      }
      out.ratio_stderr = stats::batch_mean(batch_ratios, static_cast<int>(batch_ratios.size())).stderr_;
    }
  }
  return out;
}

}  // namespace wtd::renorm
