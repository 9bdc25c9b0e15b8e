#include "haggle/money.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace haggle {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Amounts beyond this many integer digits are rejected rather than overflowing.
constexpr int kMaxIntegerDigits = 15;

}  // namespace

Money Money::from_double(double amount) {
  return Money(static_cast<std::int64_t>(std::llround(amount * 100.0)));
}

std::optional<Money> Money::parse(std::string_view text) {
  std::string_view s = trim(text);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!s.empty() && s.front() == '$') s.remove_prefix(1);
  if (s.empty() || !is_digit(s.front())) return std::nullopt;

  std::int64_t whole = 0;
  int integer_digits = 0;
  int group_len = 0;
  bool grouped = false;
  std::size_t i = 0;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (is_digit(c)) {
      if (++integer_digits > kMaxIntegerDigits) return std::nullopt;
      whole = whole * 10 + (c - '0');
      ++group_len;
    } else if (c == ',') {
      // first group may be 1-3 digits, later groups exactly 3
      if (grouped ? group_len != 3 : (group_len == 0 || group_len > 3)) return std::nullopt;
      grouped = true;
      group_len = 0;
    } else {
      break;
    }
  }
  if (grouped && group_len != 3) return std::nullopt;

  std::int64_t frac = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    int frac_digits = 0;
    bool round_up = false;
    for (; i < s.size() && is_digit(s[i]); ++i, ++frac_digits) {
      const int d = s[i] - '0';
      if (frac_digits < 2) {
        frac = frac * 10 + d;
      } else if (frac_digits == 2) {
        round_up = d >= 5;
      }
    }
    if (frac_digits == 1) frac *= 10;
    if (round_up) ++frac;
  }
  if (i != s.size()) return std::nullopt;

  const std::int64_t cents = whole * 100 + frac;
  return Money(negative ? -cents : cents);
}

std::string Money::to_string() const {
  const std::int64_t magnitude = cents_ < 0 ? -cents_ : cents_;
  std::string out = std::to_string(magnitude / 100);
  const auto frac = magnitude % 100;
  out += '.';
  out += static_cast<char>('0' + frac / 10);
  out += static_cast<char>('0' + frac % 10);
  return cents_ < 0 ? "-" + out : out;
}

}  // namespace haggle
