#include "wtd/rational.hpp"

#include <cctype>
#include <cmath>

#include "wtd/error.hpp"

namespace wtd {

namespace {

// Base-10 conversion; the string constructor would read a leading 0 as octal.
BigInt decimal(const std::string& digits) {
  BigInt v;
  mpz_set_str(v.backend().data(), digits.c_str(), 10);
  return v;
}

BigInt parse_integer(std::string_view s, std::string_view whole) {
  if (s.empty()) throw Error(ErrorKind::Config, "malformed number '" + std::string(whole) + "'");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw Error(ErrorKind::Config, "malformed number '" + std::string(whole) + "'");
  for (std::size_t j = i; j < s.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) {
      throw Error(ErrorKind::Config, "malformed number '" + std::string(whole) + "'");
    }
  }
  BigInt v = decimal(std::string(s.substr(i)));
  return s[0] == '-' ? BigInt(-v) : v;
}

BigInt pow10(long e) {
  BigInt r = 1;
  for (long i = 0; i < e; ++i) r *= 10;
  return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const BigInt p = parse_integer(text.substr(0, slash), text);
    const BigInt q = parse_integer(text.substr(slash + 1), text);
    if (q == 0) throw Error(ErrorKind::Config, "zero denominator in '" + std::string(text) + "'");
    return Rational(p, q);
  }
  std::string_view mant = text;
  long exponent = 0;
  if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mant = text.substr(0, e);
    exponent = static_cast<long>(parse_integer(text.substr(e + 1), text).convert_to<long>());
  }
  std::string digits;
  bool negative = false;
  long frac_digits = 0;
  bool seen_point = false;
  for (std::size_t i = 0; i < mant.size(); ++i) {
    const char c = mant[i];
    if (i == 0 && (c == '-' || c == '+')) {
      negative = c == '-';
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_point) ++frac_digits;
    } else {
      throw Error(ErrorKind::Config, "malformed number '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw Error(ErrorKind::Config, "malformed number '" + std::string(text) + "'");
  BigInt num = decimal(digits);
  if (negative) num = -num;
  const long scale = exponent - frac_digits;
  if (scale >= 0) return Rational(BigInt(num * pow10(scale)), BigInt(1));
  return Rational(num, pow10(-scale));
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::Config, "non-finite length");
  int exp = 0;
  const double m = std::frexp(v, &exp);
  // m * 2^53 is an exact integer
  const auto mant = static_cast<long long>(std::ldexp(m, 53));
  exp -= 53;
  Rational q{BigInt(mant)};
  if (exp > 0) {
    q *= Rational(BigInt(1) << exp);
  } else if (exp < 0) {
    q /= Rational(BigInt(1) << (-exp));
  }
  return q;
}

std::string to_string(const Rational& q) { return q.str(); }

}  // namespace wtd
