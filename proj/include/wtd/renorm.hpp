#pragma once

// Rauzy-Veech induction, Zorich acceleration and the Lyapunov exponent of an
// integer cocycle under the transposed transition matrices.
//
// Convention: the last top letter wins when its subinterval is strictly
// longer than the last bottom one; otherwise the last bottom letter wins. The
// winner w is shortened by the loser l, the loser is moved right after the
// winner in the loser's row, and the step matrix is B = I + E_{w,l}, so that
// old lengths = B * new lengths and new heights = B^T * old heights.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wtd/error.hpp"
#include "wtd/iet.hpp"
#include "wtd/rational.hpp"

namespace wtd::renorm {

using iet::Iet;
using iet::Letter;

/// k x k nonnegative integer matrix with arbitrary-precision entries.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(std::size_t k);  // identity
  static TransitionMatrix elementary(std::size_t k, Letter row, Letter col);

  std::size_t size() const { return k_; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return entries_[i * k_ + j]; }
  BigInt& operator()(std::size_t i, std::size_t j) { return entries_[i * k_ + j]; }

  TransitionMatrix operator*(const TransitionMatrix& rhs) const;
  bool operator==(const TransitionMatrix&) const = default;

  /// Exact determinant (fraction-free Gaussian elimination).
  BigInt determinant() const;
  bool nonnegative() const;
  /// Column sums; for an accumulated product, entry a is the return time of
  /// the induced subinterval of letter a.
  std::vector<BigInt> column_sums() const;

  /// B * v and B^T * v.
  template <class T>
  std::vector<T> apply(std::span<const T> v) const;
  template <class T>
  std::vector<T> apply_transpose(std::span<const T> v) const;

 private:
  std::size_t k_;
  std::vector<BigInt> entries_;
};

template <class T>
struct ZipperedRectangles {
  Iet<T> iet;
  std::vector<T> heights;  // tau, one per letter, all positive
  double log_scale = 0.0;  // accumulated log of the renormalizations

  explicit ZipperedRectangles(Iet<T> base);  // unit heights
  ZipperedRectangles(Iet<T> base, std::vector<T> tau, double log_scale = 0.0);

  T area() const;
};

template <class T>
struct RauzyStep {
  ZipperedRectangles<T> next;
  TransitionMatrix matrix;
  Letter winner;
  Letter loser;
  bool top_wins;
};

template <class T>
struct ZorichStep {
  ZipperedRectangles<T> next;
  TransitionMatrix matrix;  // product of the block's Rauzy matrices
  std::uint64_t count;      // Rauzy steps in the block
  double log_increment;     // log(total before / total after), > 0
};

/// One Rauzy-Veech step. Throws ConnectionEncountered when the two last
/// lengths are equal (exactly, or within 1e-12 of the total in double mode).
template <class T>
RauzyStep<T> rauzy_step(const ZipperedRectangles<T>& zr);

/// A maximal block of Rauzy steps of the same type, followed by rescaling the
/// lengths to total 1 (heights scaled inversely, area preserved).
template <class T>
ZorichStep<T> zorich_step(const ZipperedRectangles<T>& zr);

struct LyapunovOptions {
  std::uint64_t steps = 20000;
  int batches = 20;
  /// Remove the component along the top direction whenever the cocycle
  /// annihilates the length vector; see lyapunov_ratio.
  bool project_when_balanced = true;
  /// Cap on the Rauzy steps of a single Zorich block.
  std::uint64_t max_block = 1u << 26;
};

struct LyapunovResult {
  std::vector<double> lambda_f;  // per component, per Zorich step
  std::vector<double> lambda_f_stderr;
  std::vector<double> component_ratio;
  std::vector<bool> projected;
  double lambda_top = 0.0;
  double lambda_top_stderr = 0.0;
  double ratio = 0.0;  // max over components
  double ratio_stderr = 0.0;
  double mean_log_increment = 0.0;  // empirical discrete Teichmueller time per step
  std::uint64_t zorich_steps = 0;
  std::uint64_t rauzy_steps = 0;
  std::vector<double> log_scale;  // cumulative, one entry per Zorich step
};

/// Propagates w = B_n^T ... B_1^T f and h = B_n^T ... B_1^T (1,...,1) along the
/// Zorich path of `start`, renormalizing after every block, and fits the
/// growth rates of log|w|_inf and log|h|_inf over the last half of the steps.
///
/// If f . lambda = 0 (the cocycle has zero mean along the orbit), then
/// w_n . lambda_n = 0 for all n in exact arithmetic. Rounding reintroduces a
/// component along the top direction that would eventually dominate, so in
/// that case w is projected back onto lambda_n^perp along h_n after every
/// block. Throws Degenerate for f = 0.
LyapunovResult lyapunov_ratio(const Iet<double>& start, const iet::Cocycle& f,
                              const LyapunovOptions& options = {});

// ---------------------------------------------------------------------------

namespace detail {

template <class T>
T scalar_from(const BigInt& v) {
  if constexpr (std::is_same_v<T, double>) {
    return v.convert_to<double>();
  } else {
    return T(v);
  }
}

// Summing afresh keeps rounding in the running total from being amplified by
// the renormalization.
template <class T>
T sum(const std::vector<T>& v) {
  T s(0);
  for (const T& x : v) s += x;
  return s;
}

inline double tie_tolerance(double total) { return 1e-12 * total; }
inline Rational tie_tolerance(const Rational&) { return Rational(0); }
inline BigInt tie_tolerance(const BigInt&) { return BigInt(0); }

struct MoveInfo {
  Letter winner;
  Letter loser;
  bool top_wins;
};

/// Type of the next Rauzy step (true = top wins), or throws on a tie.
template <class T>
bool next_type(const std::vector<Letter>& top, const std::vector<Letter>& bottom,
               const std::vector<T>& lengths, const T& total) {
  const T& lt = lengths[top.back()];
  const T& lb = lengths[bottom.back()];
  const T diff = lt > lb ? T(lt - lb) : T(lb - lt);
  if (diff <= tie_tolerance(total)) {
    throw Error(ErrorKind::ConnectionEncountered, "equal last lengths in Rauzy induction");
  }
  return lt > lb;
}

/// Performs one Rauzy move in place; heights may be null.
template <class T>
MoveInfo rauzy_move(std::vector<Letter>& top, std::vector<Letter>& bottom, std::vector<T>& lengths,
                    std::vector<T>* heights, T& total) {
  const bool top_wins = next_type(top, bottom, lengths, total);
  MoveInfo m{};
  m.top_wins = top_wins;
  m.winner = top_wins ? top.back() : bottom.back();
  m.loser = top_wins ? bottom.back() : top.back();
  std::vector<Letter>& row = top_wins ? bottom : top;  // the loser's row
  row.pop_back();
  const auto pos = std::find(row.begin(), row.end(), m.winner);
  row.insert(pos + 1, m.loser);
  lengths[m.winner] -= lengths[m.loser];
  total -= lengths[m.loser];
  if (heights) (*heights)[m.loser] += (*heights)[m.winner];
  return m;
}

}  // namespace detail

template <class T>
std::vector<T> TransitionMatrix::apply(std::span<const T> v) const {
  std::vector<T> out(k_, T(0));
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = 0; j < k_; ++j) {
      if (!entries_[i * k_ + j].is_zero()) out[i] += detail::scalar_from<T>(entries_[i * k_ + j]) * v[j];
    }
  }
  return out;
}

template <class T>
std::vector<T> TransitionMatrix::apply_transpose(std::span<const T> v) const {
  std::vector<T> out(k_, T(0));
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = 0; j < k_; ++j) {
      if (!entries_[i * k_ + j].is_zero()) out[j] += detail::scalar_from<T>(entries_[i * k_ + j]) * v[i];
    }
  }
  return out;
}

template <class T>
ZipperedRectangles<T>::ZipperedRectangles(Iet<T> base)
    : iet(std::move(base)), heights(iet.size(), T(1)) {}

template <class T>
ZipperedRectangles<T>::ZipperedRectangles(Iet<T> base, std::vector<T> tau, double scale)
    : iet(std::move(base)), heights(std::move(tau)), log_scale(scale) {
  if (heights.size() != iet.size()) throw Error(ErrorKind::Config, "one height per letter required");
  for (const T& h : heights) {
    if (!(h > 0)) throw Error(ErrorKind::NonPositiveLength, "heights must be positive");
  }
}

template <class T>
T ZipperedRectangles<T>::area() const {
  T a(0);
  for (std::size_t i = 0; i < heights.size(); ++i) a += iet.lengths()[i] * heights[i];
  return a;
}

template <class T>
RauzyStep<T> rauzy_step(const ZipperedRectangles<T>& zr) {
  std::vector<Letter> top = zr.iet.top();
  std::vector<Letter> bottom = zr.iet.bottom();
  std::vector<T> lengths = zr.iet.lengths();
  std::vector<T> heights = zr.heights;
  T total = zr.iet.total();
  const detail::MoveInfo m = detail::rauzy_move(top, bottom, lengths, &heights, total);
  Iet<T> next(zr.iet.names(), std::move(top), std::move(bottom), std::move(lengths));
  return RauzyStep<T>{ZipperedRectangles<T>(std::move(next), std::move(heights), zr.log_scale),
                      TransitionMatrix::elementary(zr.iet.size(), m.winner, m.loser), m.winner,
                      m.loser, m.top_wins};
}

template <class T>
ZorichStep<T> zorich_step(const ZipperedRectangles<T>& zr) {
  std::vector<Letter> top = zr.iet.top();
  std::vector<Letter> bottom = zr.iet.bottom();
  std::vector<T> lengths = zr.iet.lengths();
  std::vector<T> heights = zr.heights;
  const T before = zr.iet.total();
  T total = before;
  TransitionMatrix product(zr.iet.size());
  std::uint64_t count = 0;
  const bool type = detail::next_type(top, bottom, lengths, total);
  do {
    const detail::MoveInfo m = detail::rauzy_move(top, bottom, lengths, &heights, total);
    // Right-multiplying by I + E_{w,l} adds column w to column l.
    for (std::size_t i = 0; i < product.size(); ++i) product(i, m.loser) += product(i, m.winner);
    ++count;
  } while (detail::next_type(top, bottom, lengths, total) == type);
  total = detail::sum(lengths);
  for (auto& l : lengths) l /= total;
  for (auto& h : heights) h *= total;
  const double increment = std::log(to_double(before)) - std::log(to_double(total));
  Iet<T> next(zr.iet.names(), std::move(top), std::move(bottom), std::move(lengths));
  return ZorichStep<T>{
      ZipperedRectangles<T>(std::move(next), std::move(heights), zr.log_scale + increment),
      std::move(product), count, increment};
}

}  // namespace wtd::renorm
