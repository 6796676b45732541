#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace lurk {

__extension__ using wide_int = __int128;

/// Exact rational number with 64-bit numerator and denominator.
///
/// Always kept in lowest terms with a positive denominator. Arithmetic is
/// exact; results that do not fit in 64 bits throw `DomainError` instead of
/// wrapping, as does division by zero.
class Rational {
public:
  constexpr Rational() noexcept = default;
  // Implicit so that integer literals mix with rationals in Eigen expressions.
  constexpr Rational(std::int64_t value) noexcept : num_(value) {} // NOLINT
  Rational(std::int64_t numerator, std::int64_t denominator);

  /// Parses "n", "-n" or "n/d" (surrounding whitespace allowed).
  static Rational parse(std::string_view text);

  [[nodiscard]] constexpr std::int64_t num() const noexcept { return num_; }
  [[nodiscard]] constexpr std::int64_t den() const noexcept { return den_; }
  [[nodiscard]] constexpr bool is_zero() const noexcept { return num_ == 0; }
  [[nodiscard]] constexpr bool is_integer() const noexcept { return den_ == 1; }
  [[nodiscard]] double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }
  [[nodiscard]] std::string str() const;

  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  Rational operator-() const;
  Rational operator+() const { return *this; }

  friend constexpr bool operator==(const Rational&, const Rational&) noexcept = default;
  friend bool operator<(const Rational& lhs, const Rational& rhs);
  friend bool operator>(const Rational& lhs, const Rational& rhs) { return rhs < lhs; }
  friend bool operator<=(const Rational& lhs, const Rational& rhs) { return !(rhs < lhs); }
  friend bool operator>=(const Rational& lhs, const Rational& rhs) { return !(lhs < rhs); }

private:
  static Rational from_wide(wide_int numerator, wide_int denominator);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& value);

inline Rational abs(const Rational& value) { return value.num() < 0 ? -value : value; }

} // namespace lurk

namespace Eigen {

template <>
struct NumTraits<lurk::Rational> : GenericNumTraits<lurk::Rational> {
  using Real = lurk::Rational;
  using NonInteger = lurk::Rational;
  using Nested = lurk::Rational;
  using Literal = lurk::Rational;

  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 8,
  };

  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};

} // namespace Eigen

namespace lurk {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RationalMatrix = MatrixX<Rational>;
using RationalVector = VectorX<Rational>;

/// Elementwise conversion of an exact matrix to doubles.
template <typename Derived>
Eigen::MatrixXd to_double(const Eigen::MatrixBase<Derived>& m) {
  return m.unaryExpr([](const Rational& r) { return r.to_double(); });
}

} // namespace lurk
