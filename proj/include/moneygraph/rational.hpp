#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace moneygraph {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator. Used for peg rates and probabilities; arbitrary precision so
/// long-horizon absorption probabilities stay exact.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : value_(value) {}  // NOLINT: implicit by design of arithmetic
  Rational(const BigInt& numerator, const BigInt& denominator);

  /// Accepts "p/q", "p" or "-p/q". Throws Error(BadParameter) otherwise.
  static Rational parse(std::string_view text);

  BigInt numerator() const;
  BigInt denominator() const;

  bool is_zero() const { return value_ == 0; }
  bool is_positive() const { return value_ > 0; }
  bool is_integer() const { return denominator() == 1; }

  double to_double() const;
  /// "p/q", or "p" when the denominator is 1.
  std::string str() const;

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& other);
  Rational& operator*=(const Rational& other);

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  using Value = boost::multiprecision::cpp_rational;
  explicit Rational(Value v) : value_(std::move(v)) {}
  Value value_{0};
};

}  // namespace moneygraph
