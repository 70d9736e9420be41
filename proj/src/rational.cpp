#include "fdaisac/rational.hpp"

#include "fdaisac/core.hpp"

#include <cctype>
#include <charconv>
#include <numeric>

namespace fdaisac {

namespace {

std::int64_t parse_uint(std::string_view s, std::string_view whole_text) {
  if (s.empty()) throw ConfigError("malformed rational '" + std::string(whole_text) + "'");
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0)
    throw ConfigError("malformed rational '" + std::string(whole_text) + "'");
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

} // namespace

Rational::Rational(std::int64_t whole_part, std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0 || numerator < 0 || whole_part < 0)
    throw ConfigError("rational parts must be non-negative with positive denominator");
  whole = whole_part + numerator / denominator;
  num = numerator % denominator;
  den = denominator;
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
}

Rational Rational::parse(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw ConfigError("empty rational");

  // "a+p/q"
  if (auto plus = s.find('+'); plus != std::string_view::npos) {
    const auto w = parse_uint(trim(s.substr(0, plus)), text);
    const auto frac = trim(s.substr(plus + 1));
    const auto slash = frac.find('/');
    if (slash == std::string_view::npos) throw ConfigError("malformed rational '" + std::string(text) + "'");
    const auto p = parse_uint(trim(frac.substr(0, slash)), text);
    const auto q = parse_uint(trim(frac.substr(slash + 1)), text);
    if (q == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return Rational(w, p, q);
  }
  // "p/q"
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto p = parse_uint(trim(s.substr(0, slash)), text);
    const auto q = parse_uint(trim(s.substr(slash + 1)), text);
    if (q == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return Rational(0, p, q);
  }
  // decimal "a" or "a.b"
  const auto dot = s.find('.');
  if (dot == std::string_view::npos) return Rational(parse_uint(s, text), 0, 1);
  const auto int_part = s.substr(0, dot);
  const auto frac_part = s.substr(dot + 1);
  if (frac_part.size() > 12)
    throw ConfigError("offset '" + std::string(text) + "' has more than 12 decimal digits");
  const std::int64_t w = int_part.empty() ? 0 : parse_uint(int_part, text);
  if (frac_part.empty()) return Rational(w, 0, 1);
  std::int64_t q = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) q *= 10;
  return Rational(w, parse_uint(frac_part, text), q);
}

std::string Rational::str() const {
  if (num == 0) return std::to_string(whole);
  return std::to_string(whole) + "+" + std::to_string(num) + "/" + std::to_string(den);
}

bool operator<(const Rational& a, const Rational& b) {
  if (a.whole != b.whole) return a.whole < b.whole;
  // num/den comparison via cross-multiplication (dens bounded by 1e12)
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

Rational difference(const Rational& a, const Rational& b) {
  if (a < b) throw ConfigError("negative rational difference");
  const __int128 l = std::lcm(a.den, b.den);
  __int128 total = (static_cast<__int128>(a.whole) - b.whole) * l + a.num * (l / a.den) - b.num * (l / b.den);
  const auto w = static_cast<std::int64_t>(total / l);
  const auto n = static_cast<std::int64_t>(total % l);
  return Rational(w, n, static_cast<std::int64_t>(l));
}

} // namespace fdaisac
