#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hcfl {

/// Raised when an integer currency operation would leave the int64 range.
class OverflowError : public std::overflow_error
{
public:
  using std::overflow_error::overflow_error;
};

/// Exact signed amount of currency, in Gwei.
///
/// Every arithmetic operator is checked; an out-of-range result throws
/// OverflowError instead of wrapping. Text form is a plain decimal integer.
class Money
{
public:
  constexpr Money() = default;
  constexpr explicit Money(std::int64_t gwei)
    : gwei_(gwei)
  {}

  constexpr std::int64_t gwei() const { return gwei_; }

  friend constexpr auto operator<=>(Money, Money) = default;

  friend Money operator+(Money a, Money b)
  {
    std::int64_t r{};
    if (__builtin_add_overflow(a.gwei_, b.gwei_, &r))
      throw OverflowError("money addition overflow");
    return Money{r};
  }

  friend Money operator-(Money a, Money b)
  {
    std::int64_t r{};
    if (__builtin_sub_overflow(a.gwei_, b.gwei_, &r))
      throw OverflowError("money subtraction overflow");
    return Money{r};
  }

  friend Money operator*(Money a, std::int64_t k)
  {
    std::int64_t r{};
    if (__builtin_mul_overflow(a.gwei_, k, &r))
      throw OverflowError("money multiplication overflow");
    return Money{r};
  }
  friend Money operator*(std::int64_t k, Money a) { return a * k; }

  Money operator-() const { return Money{0} - *this; }

  Money& operator+=(Money o) { return *this = *this + o; }
  Money& operator-=(Money o) { return *this = *this - o; }

  /// Floor division (rounds toward negative infinity).
  Money floor_div(std::int64_t d) const;

  Money abs() const { return gwei_ < 0 ? -*this : *this; }

  std::string to_string() const { return std::to_string(gwei_); }

  /// Parses a decimal integer; rejects anything else (signs allowed).
  static Money parse(std::string_view text);

private:
  std::int64_t gwei_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Money m)
{
  return os << m.gwei();
}

inline Money operator""_gwei(unsigned long long v)
{
  return Money{static_cast<std::int64_t>(v)};
}

}  // namespace hcfl
