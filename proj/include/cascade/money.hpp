#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace cascade {

// Fixed-point dollars with micro-dollar resolution. All cost arithmetic in the
// library goes through this type so sums are exact regardless of order.
class Money {
 public:
  static constexpr std::int64_t kMicrosPerUnit = 1'000'000;

  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  // Rounds half away from zero to the nearest micro-dollar.
  static Money from_double(double dollars);
  // Accepts "12", "12.5", "-0.000001", "1e-3" is rejected. More than six
  // fractional digits are rounded half-up.
  static Money parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kMicrosPerUnit; }
  // Always six fractional digits, '.' separator.
  std::string to_string() const;
  // Rounded half-up to `decimals` (0..6) fractional digits.
  std::string to_string(int decimals) const;

  constexpr bool is_zero() const { return micros_ == 0; }

  constexpr Money& operator+=(Money other) {
    micros_ += other.micros_;
    return *this;
  }
  constexpr Money& operator-=(Money other) {
    micros_ -= other.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return Money(a.micros_ + b.micros_); }
  friend constexpr Money operator-(Money a, Money b) { return Money(a.micros_ - b.micros_); }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}

  std::int64_t micros_ = 0;
};

}  // namespace cascade
