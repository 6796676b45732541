#include "lurk/rational.hpp"

#include <charconv>
#include <limits>
#include <numeric>
#include <ostream>

#include "lurk/errors.hpp"

namespace lurk {

namespace {

constexpr wide_int kMax = std::numeric_limits<std::int64_t>::max();
constexpr wide_int kMin = std::numeric_limits<std::int64_t>::min();

wide_int gcd_wide(wide_int a, wide_int b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const wide_int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw DomainError("invalid rational literal '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

} // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  *this = from_wide(numerator, denominator);
}

Rational Rational::from_wide(wide_int numerator, wide_int denominator) {
  if (denominator == 0) throw DomainError("rational division by zero");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const wide_int g = gcd_wide(numerator, denominator);
  if (g > 1) {
    numerator /= g;
    denominator /= g;
  }
  if (numerator > kMax || numerator < kMin || denominator > kMax) {
    throw DomainError("rational overflow");
  }
  Rational r;
  r.num_ = static_cast<std::int64_t>(numerator);
  r.den_ = static_cast<std::int64_t>(denominator);
  return r;
}

Rational Rational::parse(std::string_view text) {
  const auto s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(s, text));
  return Rational(parse_int(trim(s.substr(0, slash)), text),
                  parse_int(trim(s.substr(slash + 1)), text));
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational& Rational::operator+=(const Rational& rhs) {
  const wide_int n = static_cast<wide_int>(num_) * rhs.den_ + static_cast<wide_int>(rhs.num_) * den_;
  const wide_int d = static_cast<wide_int>(den_) * rhs.den_;
  return *this = from_wide(n, d);
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
  return *this = from_wide(static_cast<wide_int>(num_) * rhs.num_,
                           static_cast<wide_int>(den_) * rhs.den_);
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw DomainError("rational division by zero");
  return *this = from_wide(static_cast<wide_int>(num_) * rhs.den_,
                           static_cast<wide_int>(den_) * rhs.num_);
}

Rational Rational::operator-() const { return from_wide(-static_cast<wide_int>(num_), den_); }

bool operator<(const Rational& lhs, const Rational& rhs) {
  return static_cast<wide_int>(lhs.num_) * rhs.den_ < static_cast<wide_int>(rhs.num_) * lhs.den_;
}

std::ostream& operator<<(std::ostream& os, const Rational& value) { return os << value.str(); }

} // namespace lurk
