#ifndef FDAISAC_RATIONAL_HPP
#define FDAISAC_RATIONAL_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace fdaisac {

/// Non-negative exact rational multiplier, kept as integer part plus a
/// proper fraction num/den in lowest terms (den >= 1, 0 <= num < den).
struct Rational {
  std::int64_t whole = 0;
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t whole_part, std::int64_t numerator, std::int64_t denominator);

  static Rational from_integer(std::int64_t v) { return Rational(v, 0, 1); }

  /// Parses "3", "5.2", "3.17", "3+17/100" or "7/2". Decimals with more than
  /// 12 fractional digits are rejected.
  static Rational parse(std::string_view text);

  double value() const { return static_cast<double>(whole) + static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return num == 0; }
  bool is_zero() const { return whole == 0 && num == 0; }

  /// Canonical text form, "whole+num/den" or "whole".
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b);
};

/// a - b as an exact rational; requires a >= b.
Rational difference(const Rational& a, const Rational& b);

} // namespace fdaisac

#endif // FDAISAC_RATIONAL_HPP
