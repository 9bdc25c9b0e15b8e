#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace haggle {

// Exact currency amount stored as a whole number of cents.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }

  // Rounds half away from zero to the nearest cent.
  static Money from_double(double amount);

  // Parses a decimal amount such as "8", "8.5", "$1,200.00" or "-3.25".
  // Digits past the second fractional place are rounded half away from zero.
  // Thousands separators must group exactly three digits.
  static std::optional<Money> parse(std::string_view text);

  constexpr std::int64_t cents() const { return cents_; }
  double to_double() const { return static_cast<double>(cents_) / 100.0; }

  // Always two fractional digits, no currency sign: "8.50", "-0.25".
  std::string to_string() const;

  // "$8.50"
  std::string to_display() const { return "$" + to_string(); }

  friend constexpr auto operator<=>(Money, Money) = default;
  friend constexpr Money operator+(Money a, Money b) { return Money(a.cents_ + b.cents_); }
  friend constexpr Money operator-(Money a, Money b) { return Money(a.cents_ - b.cents_); }

 private:
  constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
  std::int64_t cents_ = 0;
};

}  // namespace haggle
