#include "moneygraph/rational.hpp"

#include <charconv>

#include "moneygraph/errors.hpp"

namespace moneygraph {
namespace {

BigInt parse_integer(std::string_view text, bool allow_sign) {
  bool negative = false;
  if (allow_sign && !text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty() || text.size() > 4000) {
    throw Error(ErrorCode::BadParameter, "malformed rational");
  }
  BigInt value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw Error(ErrorCode::BadParameter, "malformed rational");
    value = value * 10 + (c - '0');
  }
  return negative ? BigInt(-value) : value;
}

}  // namespace

Rational::Rational(const BigInt& numerator, const BigInt& denominator) {
  if (denominator == 0) throw Error(ErrorCode::BadParameter, "zero denominator");
  value_ = Value(numerator, denominator);
}

Rational Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text, true), 1);
  BigInt num = parse_integer(text.substr(0, slash), true);
  BigInt den = parse_integer(text.substr(slash + 1), false);
  if (den == 0) throw Error(ErrorCode::BadParameter, "zero denominator");
  return Rational(num, den);
}

BigInt Rational::numerator() const { return boost::multiprecision::numerator(value_); }
BigInt Rational::denominator() const { return boost::multiprecision::denominator(value_); }

double Rational::to_double() const { return value_.convert_to<double>(); }

std::string Rational::str() const {
  auto num = numerator();
  auto den = denominator();
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational Rational::operator-() const { return Rational(Value(-value_)); }
Rational operator+(const Rational& a, const Rational& b) { return Rational(Rational::Value(a.value_ + b.value_)); }
Rational operator-(const Rational& a, const Rational& b) { return Rational(Rational::Value(a.value_ - b.value_)); }
Rational operator*(const Rational& a, const Rational& b) { return Rational(Rational::Value(a.value_ * b.value_)); }
Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero()) throw Error(ErrorCode::BadParameter, "division by zero");
  return Rational(Rational::Value(a.value_ / b.value_));
}
Rational& Rational::operator+=(const Rational& other) {
  value_ += other.value_;
  return *this;
}
Rational& Rational::operator*=(const Rational& other) {
  value_ *= other.value_;
  return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  if (a.value_ < b.value_) return std::strong_ordering::less;
  if (a.value_ > b.value_) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace moneygraph
