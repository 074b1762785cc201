#pragma once

// Interval exchange transformations over double or exact rational lengths.
//
// Subintervals are half-open [u, u + lambda). Letters are indices into the
// alphabet; `top` lists letters by position in the top decomposition, `bottom`
// by position in the bottom decomposition. The map sends the top subinterval
// of a letter onto its bottom subinterval by a translation.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wtd/error.hpp"
#include "wtd/rational.hpp"
#include "wtd/rng.hpp"

namespace wtd::iet {

using Letter = std::uint32_t;
inline constexpr int kSingular = -1;

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  /// Points within this distance (relative to the total length) of a cut are
  /// treated as singular.
  static constexpr double singular_tolerance = 1e-12;
  static double tolerance(double total) { return singular_tolerance * total; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational tolerance(const Rational&) { return Rational(0); }
};

/// No proper prefix of `top` holds the same letters as the prefix of `bottom`
/// of equal length.
bool is_irreducible(std::span<const Letter> top, std::span<const Letter> bottom);

/// Checks that `order` is a permutation of 0..k-1.
bool is_permutation_of_alphabet(std::span<const Letter> order, std::size_t k);

template <class T>
class Iet {
 public:
  Iet(std::vector<std::string> names, std::vector<Letter> top, std::vector<Letter> bottom,
      std::vector<T> lengths);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Letter>& top() const { return top_; }
  const std::vector<Letter>& bottom() const { return bottom_; }
  const std::vector<T>& lengths() const { return lengths_; }
  const T& length(Letter a) const { return lengths_[a]; }
  const T& total() const { return cuts_.back(); }
  const T& top_start(Letter a) const { return top_start_[a]; }
  const T& bottom_start(Letter a) const { return bottom_start_[a]; }
  /// delta_a = sum of lengths from a to the end on top minus the same sum on
  /// the bottom; x in the top interval of a maps to x + delta_a.
  const T& translation(Letter a) const { return shift_[a]; }
  T tolerance() const { return ScalarTraits<T>::tolerance(total()); }

  /// Interior cut points of the top decomposition.
  std::vector<T> top_cuts() const;
  /// Bottom start points of the letters that are not first on top, i.e. the
  /// images of the interior top cuts. A connection is an orbit from one of
  /// these to an interior top cut.
  std::vector<T> bottom_cuts() const;

  /// Letter whose top subinterval contains x, or kSingular for an interior cut
  /// (within tolerance in double mode). Throws OutOfRange outside [0, total).
  int locate(const T& x) const;

  std::optional<T> apply(const T& x) const;

  Iet with_lengths(std::vector<T> lengths) const {
    return Iet(names_, top_, bottom_, std::move(lengths));
  }

  std::optional<Letter> letter_named(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::vector<Letter> top_, bottom_;
  std::vector<T> lengths_;
  std::vector<T> cuts_;  // cuts_[p] = start of top position p; cuts_[k] = total
  std::vector<T> top_start_, bottom_start_, shift_;
  T tol_;
};

/// Converts an exact IET to double lengths.
Iet<double> to_double(const Iet<Rational>& iet);

/// Default alphabet names "A", "B", ...
std::vector<std::string> default_names(std::size_t k);

struct CodingWord {
  std::vector<Letter> letters;

  std::string str(const std::vector<std::string>& names) const;
  bool operator==(const CodingWord&) const = default;
};

struct CodingResult {
  CodingWord word;
  std::optional<std::uint64_t> singular_at;  // step whose point was singular
};

/// First n letters of the itinerary of x.
template <class T>
CodingResult code_orbit(const Iet<T>& iet, T x, std::uint64_t n);

/// Z^d-valued cocycle given by its values on the letters.
class Cocycle {
 public:
  Cocycle(std::size_t letters, std::size_t dim, std::vector<std::int64_t> values);
  static Cocycle constant(std::size_t letters, std::int64_t value);
  static Cocycle zero(std::size_t letters, std::size_t dim = 1);
  static Cocycle from_letter_values(std::span<const std::int64_t> values);

  std::size_t letters() const { return letters_; }
  std::size_t dim() const { return dim_; }
  std::span<const std::int64_t> operator()(Letter a) const {
    return {values_.data() + a * dim_, dim_};
  }
  std::int64_t value(Letter a, std::size_t component) const { return values_[a * dim_ + component]; }
  /// max over letters of the sup norm of f(letter).
  std::int64_t sup_norm() const;
  bool is_zero() const;
  Cocycle component(std::size_t i) const;

 private:
  std::size_t letters_;
  std::size_t dim_;
  std::vector<std::int64_t> values_;
};

/// Streams the return cycles C_n(x), n = 1, 2, ..., as per-letter visit
/// counts, together with the pairing <f, C_n>. Each step costs one subinterval
/// lookup plus O(d) updates.
template <class T>
class ReturnCycleStream {
 public:
  ReturnCycleStream(const Iet<T>& iet, const Cocycle& cocycle, T x);

  /// Advances to C_{n+1}. Returns false (and sets singular_at) if the current
  /// orbit point is singular.
  bool next();

  std::uint64_t n() const { return n_; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::span<const std::int64_t> pairing() const { return pairing_; }
  /// Max over components of |<f_i, C_n>|.
  std::int64_t pairing_sup() const;
  Letter last_letter() const { return last_; }
  const T& position() const { return x_; }
  std::optional<std::uint64_t> singular_at() const { return singular_at_; }

 private:
  const Iet<T>* iet_;
  const Cocycle* cocycle_;
  T x_;
  std::uint64_t n_ = 0;
  Letter last_ = 0;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> pairing_;
  std::optional<std::uint64_t> singular_at_;
};

struct HittingTimes {
  /// first[a] = min { n < depth : T^n x lies in the top interval of a }.
  std::vector<std::optional<std::uint64_t>> first;
  std::optional<std::uint64_t> singular_at;

  bool all_seen() const;
  /// max over letters; nullopt if some letter was not seen.
  std::optional<std::uint64_t> max() const;
};

template <class T>
HittingTimes hitting_times(const Iet<T>& iet, T x, std::uint64_t depth);

/// Largest max-hitting-time over `samples` random basepoints; letters not seen
/// within `depth` count as `depth`.
std::uint64_t empirical_hitting_bound(const Iet<double>& iet, int samples, std::uint64_t depth,
                                      std::uint64_t seed);

template <class T>
struct KeaneResult {
  bool connection = false;
  std::uint64_t depth = 0;
  // witness when connection == true: T^step(bottom cut of `source`) = top cut
  std::uint64_t step = 0;
  Letter source = 0;
  T start{};
  T cut{};
};

/// Looks for an orbit segment of length <= depth from a bottom cut point to an
/// interior top cut point.
template <class T>
KeaneResult<T> keane_check(const Iet<T>& iet, std::uint64_t depth);

struct StabilityResult {
  double delta = 0.0;  // certified radius, 0 if none was found
  int halvings = 0;
  std::uint64_t prefix_length = 0;
  CodingWord prefix;
};

/// Finds delta > 0 such that every sampled length perturbation p with
/// sum(p) = 0 and |p|_inf = delta leaves the length-m coding of the left
/// endpoint unchanged: halve from min(lambda)/2 until `samples` perturbations
/// all agree, then bisect upwards against the last failing radius.
StabilityResult coding_stability_radius(const Iet<double>& iet, std::uint64_t prefix_length,
                                        int samples, std::uint64_t seed, int refine_steps = 20);

/// Uniformly random irreducible pair (top = identity, bottom random).
std::vector<Letter> random_irreducible_bottom(std::size_t k, CounterRng& rng);

/// Random positive lengths summing to 1: exact rationals with the given
/// denominator, or doubles.
std::vector<Rational> random_rational_lengths(std::size_t k, CounterRng& rng,
                                              std::uint64_t denominator = 1000003);
std::vector<double> random_lengths(std::size_t k, CounterRng& rng);

// ---------------------------------------------------------------------------

template <class T>
Iet<T>::Iet(std::vector<std::string> names, std::vector<Letter> top, std::vector<Letter> bottom,
            std::vector<T> lengths)
    : names_(std::move(names)),
      top_(std::move(top)),
      bottom_(std::move(bottom)),
      lengths_(std::move(lengths)) {
  const std::size_t k = names_.size();
  if (k < 2) throw Error(ErrorKind::Config, "an interval exchange needs at least two letters");
  if (!is_permutation_of_alphabet(top_, k) || !is_permutation_of_alphabet(bottom_, k)) {
    throw Error(ErrorKind::Config, "top and bottom must be permutations of the alphabet");
  }
  if (lengths_.size() != k) throw Error(ErrorKind::Config, "one length per letter required");
  for (std::size_t a = 0; a < k; ++a) {
    if (!(lengths_[a] > 0)) {
      throw Error(ErrorKind::NonPositiveLength, "length of " + names_[a] + " is not positive");
    }
  }
  if (!is_irreducible(top_, bottom_)) {
    throw Error(ErrorKind::Reducible, "the permutation pair is reducible");
  }
  cuts_.assign(k + 1, T(0));
  top_start_.assign(k, T(0));
  bottom_start_.assign(k, T(0));
  shift_.assign(k, T(0));
  for (std::size_t p = 0; p < k; ++p) {
    top_start_[top_[p]] = cuts_[p];
    cuts_[p + 1] = cuts_[p] + lengths_[top_[p]];
  }
  T acc(0);
  for (std::size_t p = 0; p < k; ++p) {
    bottom_start_[bottom_[p]] = acc;
    acc += lengths_[bottom_[p]];
  }
  for (std::size_t a = 0; a < k; ++a) shift_[a] = bottom_start_[a] - top_start_[a];
  tol_ = ScalarTraits<T>::tolerance(cuts_.back());
}

template <class T>
std::vector<T> Iet<T>::top_cuts() const {
  return std::vector<T>(cuts_.begin() + 1, cuts_.end() - 1);
}

template <class T>
std::vector<T> Iet<T>::bottom_cuts() const {
  std::vector<T> out;
  for (std::size_t p = 1; p < top_.size(); ++p) out.push_back(bottom_start_[top_[p]]);
  return out;
}

template <class T>
int Iet<T>::locate(const T& x) const {
  if (x < 0 || !(x < cuts_.back())) {
    throw Error(ErrorKind::OutOfRange, "point outside [0, total)");
  }
  const auto it = std::upper_bound(cuts_.begin() + 1, cuts_.end() - 1, x);
  const auto p = static_cast<std::size_t>(it - cuts_.begin()) - 1;
  if constexpr (ScalarTraits<T>::exact) {
    if (p > 0 && x == cuts_[p]) return kSingular;
  } else {
    if (p > 0 && x - cuts_[p] <= tol_) return kSingular;
    if (p + 1 < top_.size() && cuts_[p + 1] - x <= tol_) return kSingular;
  }
  return static_cast<int>(top_[p]);
}

template <class T>
std::optional<T> Iet<T>::apply(const T& x) const {
  const int a = locate(x);
  if (a == kSingular) return std::nullopt;
  return T(x + shift_[static_cast<Letter>(a)]);
}

template <class T>
std::optional<Letter> Iet<T>::letter_named(std::string_view name) const {
  for (std::size_t a = 0; a < names_.size(); ++a) {
    if (names_[a] == name) return static_cast<Letter>(a);
  }
  return std::nullopt;
}

template <class T>
CodingResult code_orbit(const Iet<T>& iet, T x, std::uint64_t n) {
  CodingResult out;
  out.word.letters.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, 1u << 20)));
  for (std::uint64_t i = 0; i < n; ++i) {
    const int a = iet.locate(x);
    if (a == kSingular) {
      out.singular_at = i;
      break;
    }
    out.word.letters.push_back(static_cast<Letter>(a));
    x += iet.translation(static_cast<Letter>(a));
  }
  return out;
}

template <class T>
ReturnCycleStream<T>::ReturnCycleStream(const Iet<T>& iet, const Cocycle& cocycle, T x)
    : iet_(&iet),
      cocycle_(&cocycle),
      x_(std::move(x)),
      counts_(iet.size(), 0),
      pairing_(cocycle.dim(), 0) {
  if (cocycle.letters() != iet.size()) {
    throw Error(ErrorKind::Config, "cocycle and interval exchange have different alphabets");
  }
  iet.locate(x_);  // range check
}

template <class T>
bool ReturnCycleStream<T>::next() {
  if (singular_at_) return false;
  const int a = iet_->locate(x_);
  if (a == kSingular) {
    singular_at_ = n_;
    return false;
  }
  last_ = static_cast<Letter>(a);
  ++counts_[last_];
  const auto f = (*cocycle_)(last_);
  for (std::size_t i = 0; i < pairing_.size(); ++i) pairing_[i] += f[i];
  x_ += iet_->translation(last_);
  ++n_;
  return true;
}

template <class T>
std::int64_t ReturnCycleStream<T>::pairing_sup() const {
  std::int64_t m = 0;
  for (auto v : pairing_) m = std::max(m, v < 0 ? -v : v);
  return m;
}

template <class T>
HittingTimes hitting_times(const Iet<T>& iet, T x, std::uint64_t depth) {
  HittingTimes out;
  out.first.assign(iet.size(), std::nullopt);
  std::size_t seen = 0;
  for (std::uint64_t i = 0; i < depth && seen < iet.size(); ++i) {
    const int a = iet.locate(x);
    if (a == kSingular) {
      out.singular_at = i;
      break;
    }
    auto& slot = out.first[static_cast<std::size_t>(a)];
    if (!slot) {
      slot = i;
      ++seen;
    }
    x += iet.translation(static_cast<Letter>(a));
  }
  return out;
}

template <class T>
KeaneResult<T> keane_check(const Iet<T>& iet, std::uint64_t depth) {
  KeaneResult<T> out;
  out.depth = depth;
  const auto cuts = iet.top_cuts();
  const T tol = iet.tolerance();
  for (std::size_t p = 1; p < iet.top().size(); ++p) {
    const Letter source = iet.top()[p];
    T x = iet.bottom_start(source);
    for (std::uint64_t step = 0; step <= depth; ++step) {
      for (const T& c : cuts) {
        const T diff = x > c ? T(x - c) : T(c - x);
        if (diff <= tol) {
          out.connection = true;
          out.step = step;
          out.source = source;
          out.start = iet.bottom_start(source);
          out.cut = c;
          return out;
        }
      }
      const int a = iet.locate(x);
      if (a == kSingular) break;  // unreachable: singular points match a cut above
      x += iet.translation(static_cast<Letter>(a));
    }
  }
  return out;
}

}  // namespace wtd::iet
