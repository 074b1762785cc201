#include "wtd/iet.hpp"

#include <cmath>
#include <numeric>

namespace wtd::iet {

bool is_permutation_of_alphabet(std::span<const Letter> order, std::size_t k) {
  if (order.size() != k) return false;
  std::vector<bool> seen(k, false);
  for (Letter a : order) {
    if (a >= k || seen[a]) return false;
    seen[a] = true;
  }
  return true;
}

bool is_irreducible(std::span<const Letter> top, std::span<const Letter> bottom) {
  const std::size_t k = top.size();
  if (k != bottom.size()) return false;
  // The prefixes of length j hold the same letter set iff the running count of
  // letters seen on exactly one side drops to zero.
  std::vector<int> balance(k, 0);
  int unmatched = 0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    for (int delta : {+1, -1}) {
      const Letter a = delta > 0 ? top[j] : bottom[j];
      const int before = balance[a];
      balance[a] += delta;
      unmatched += (balance[a] != 0) - (before != 0);
    }
    if (unmatched == 0) return false;
  }
  return true;
}

Iet<double> to_double(const Iet<Rational>& iet) {
  std::vector<double> lengths;
  lengths.reserve(iet.size());
  for (const auto& l : iet.lengths()) lengths.push_back(wtd::to_double(l));
  return Iet<double>(iet.names(), iet.top(), iet.bottom(), std::move(lengths));
}

std::vector<std::string> default_names(std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) {
    names.push_back(i < 26 ? std::string(1, static_cast<char>('A' + i)) : "L" + std::to_string(i));
  }
  return names;
}

std::string CodingWord::str(const std::vector<std::string>& names) const {
  std::string out;
  for (Letter a : letters) out += names.at(a);
  return out;
}

Cocycle::Cocycle(std::size_t letters, std::size_t dim, std::vector<std::int64_t> values)
    : letters_(letters), dim_(dim), values_(std::move(values)) {
  if (dim_ < 1) throw Error(ErrorKind::Config, "cocycle dimension must be >= 1");
  if (values_.size() != letters_ * dim_) {
    throw Error(ErrorKind::Config, "cocycle needs one length-d vector per letter");
  }
}

Cocycle Cocycle::constant(std::size_t letters, std::int64_t value) {
  return Cocycle(letters, 1, std::vector<std::int64_t>(letters, value));
}

Cocycle Cocycle::zero(std::size_t letters, std::size_t dim) {
  return Cocycle(letters, dim, std::vector<std::int64_t>(letters * dim, 0));
}

Cocycle Cocycle::from_letter_values(std::span<const std::int64_t> values) {
  return Cocycle(values.size(), 1, std::vector<std::int64_t>(values.begin(), values.end()));
}

std::int64_t Cocycle::sup_norm() const {
  std::int64_t m = 0;
  for (auto v : values_) m = std::max(m, v < 0 ? -v : v);
  return m;
}

bool Cocycle::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](std::int64_t v) { return v == 0; });
}

Cocycle Cocycle::component(std::size_t i) const {
  if (i >= dim_) throw Error(ErrorKind::Config, "cocycle component out of range");
  std::vector<std::int64_t> v(letters_);
  for (std::size_t a = 0; a < letters_; ++a) v[a] = values_[a * dim_ + i];
  return Cocycle(letters_, 1, std::move(v));
}

bool HittingTimes::all_seen() const {
  return std::all_of(first.begin(), first.end(), [](const auto& v) { return v.has_value(); });
}

std::optional<std::uint64_t> HittingTimes::max() const {
  std::uint64_t m = 0;
  for (const auto& v : first) {
    if (!v) return std::nullopt;
    m = std::max(m, *v);
  }
  return m;
}

std::uint64_t empirical_hitting_bound(const Iet<double>& iet, int samples, std::uint64_t depth,
                                      std::uint64_t seed) {
  CounterRng rng(seed, 0x417);
  std::uint64_t bound = 0;
  for (int s = 0; s < samples; ++s) {
    const double x = rng.uniform() * iet.total();
    const HittingTimes h = hitting_times(iet, x, depth);
    if (h.singular_at) continue;
    bound = std::max(bound, h.max().value_or(depth));
  }
  return bound;
}

namespace {

bool coding_matches(const Iet<double>& iet, const std::vector<double>& lengths,
                    const CodingWord& reference, std::uint64_t m) {
  for (double v : lengths) {
    if (!(v > 0.0)) return false;
  }
  const CodingResult c = code_orbit(iet.with_lengths(lengths), 0.0, m);
  return !c.singular_at && c.word == reference;
}

// For a fixed coding word every orbit point and cut is affine in the lengths, so the set of
// lengths sharing the word is convex. Checking the vertices of the zero-sum slice of the
// sup-norm ball therefore covers the whole ball.
bool vertices_are_stable(const Iet<double>& iet, const CodingWord& reference, std::uint64_t m,
                         double delta) {
  const std::size_t k = iet.size();
  if (k > 12) return true;
  std::vector<double> lengths(k);
  for (std::size_t free = 0; free < k; ++free) {
    for (std::uint32_t signs = 0; signs < (1u << (k - 1)); ++signs) {
      double sum = 0.0;
      std::size_t bit = 0;
      for (std::size_t a = 0; a < k; ++a) {
        if (a == free) continue;
        const double step = (signs >> bit++) & 1u ? delta : -delta;
        lengths[a] = iet.lengths()[a] + step;
        sum += step;
      }
      if (std::abs(sum) > delta * (1.0 + 1e-12)) continue;
      lengths[free] = iet.lengths()[free] - sum;
      if (!coding_matches(iet, lengths, reference, m)) return false;
    }
  }
  return true;
}

bool prefix_is_stable(const Iet<double>& iet, const CodingWord& reference, std::uint64_t m,
                      double delta, int samples, CounterRng& rng) {
  const std::size_t k = iet.size();
  if (!vertices_are_stable(iet, reference, m, delta)) return false;
  std::vector<double> p(k), lengths(k);
  for (int s = 0; s < samples; ++s) {
    double mean = 0.0;
    for (auto& v : p) {
      v = rng.uniform(-1.0, 1.0);
      mean += v;
    }
    mean /= static_cast<double>(k);
    double sup = 0.0;
    for (auto& v : p) {
      v -= mean;
      sup = std::max(sup, std::abs(v));
    }
    if (sup == 0.0) continue;
    for (std::size_t a = 0; a < k; ++a) {
      lengths[a] = iet.lengths()[a] + delta * p[a] / sup;
      if (!(lengths[a] > 0.0)) return false;
    }
    const Iet<double> moved = iet.with_lengths(lengths);
    const CodingResult c = code_orbit(moved, 0.0, m);
    if (c.singular_at || !(c.word == reference)) return false;
  }
  return true;
}

}  // namespace

StabilityResult coding_stability_radius(const Iet<double>& iet, std::uint64_t prefix_length,
                                        int samples, std::uint64_t seed, int refine_steps) {
  StabilityResult out;
  out.prefix_length = prefix_length;
  const CodingResult ref = code_orbit(iet, 0.0, prefix_length);
  out.prefix = ref.word;
  if (ref.singular_at) return out;

  CounterRng rng(seed, 0x57ab);
  const double min_len = *std::min_element(iet.lengths().begin(), iet.lengths().end());
  double fail = 0.0;
  double delta = 0.5 * min_len;
  while (!prefix_is_stable(iet, ref.word, prefix_length, delta, samples, rng)) {
    fail = delta;
    delta *= 0.5;
    if (++out.halvings > 80) return out;
  }
  if (fail > 0.0) {
    double pass = delta;
    for (int i = 0; i < refine_steps; ++i) {
      const double mid = 0.5 * (pass + fail);
      if (prefix_is_stable(iet, ref.word, prefix_length, mid, samples, rng)) {
        pass = mid;
      } else {
        fail = mid;
      }
    }
    delta = pass;
  }
  out.delta = delta;
  return out;
}

std::vector<Letter> random_irreducible_bottom(std::size_t k, CounterRng& rng) {
  std::vector<Letter> top(k), bottom(k);
  std::iota(top.begin(), top.end(), 0);
  for (;;) {
    std::iota(bottom.begin(), bottom.end(), 0);
    for (std::size_t i = k - 1; i > 0; --i) {
      std::swap(bottom[i], bottom[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    if (is_irreducible(top, bottom)) return bottom;
  }
}

std::vector<Rational> random_rational_lengths(std::size_t k, CounterRng& rng,
                                              std::uint64_t denominator) {
  std::vector<Rational> out;
  std::vector<std::uint64_t> weights(k);
  std::uint64_t sum = 0;
  for (auto& w : weights) {
    w = 1 + rng.below(denominator);
    sum += w;
  }
  for (auto w : weights) out.emplace_back(BigInt(w), BigInt(sum));
  return out;
}

std::vector<double> random_lengths(std::size_t k, CounterRng& rng) {
  std::vector<double> out(k);
  double sum = 0.0;
  for (auto& v : out) {
    v = -std::log(rng.uniform_open());
    sum += v;
  }
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace wtd::iet
