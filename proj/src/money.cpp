#include "cascade/money.hpp"

#include <cmath>
#include <cstdlib>

#include "cascade/error.hpp"

namespace cascade {

Money Money::from_double(double dollars) {
  if (!std::isfinite(dollars)) {
    throw Error(ErrorCode::InvalidValue, "non-finite money value");
  }
  return Money(std::llround(dollars * static_cast<double>(kMicrosPerUnit)));
}

Money Money::parse(std::string_view text) {
  auto fail = [&] { return Error(ErrorCode::InvalidValue, "bad money literal '" + std::string(text) + "'"); };
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::int64_t whole = 0;
  std::size_t digits = 0;
  while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
    whole = whole * 10 + (text[pos] - '0');
    if (whole > 9'000'000'000'000) throw fail();
    ++pos;
    ++digits;
  }
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool round_up = false;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (frac_digits < 6) {
        frac = frac * 10 + (text[pos] - '0');
        ++frac_digits;
      } else if (frac_digits == 6) {
        round_up = text[pos] >= '5';
        ++frac_digits;
      }
      ++pos;
      ++digits;
    }
  }
  if (digits == 0 || pos != text.size()) throw fail();
  for (int i = std::min(frac_digits, 6); i < 6; ++i) frac *= 10;
  std::int64_t micros = whole * kMicrosPerUnit + frac + (round_up ? 1 : 0);
  return Money(negative ? -micros : micros);
}

std::string Money::to_string() const { return to_string(6); }

std::string Money::to_string(int decimals) const {
  if (decimals < 0) decimals = 0;
  if (decimals > 6) decimals = 6;
  std::int64_t scale = 1;
  for (int i = decimals; i < 6; ++i) scale *= 10;
  std::int64_t magnitude = micros_ < 0 ? -micros_ : micros_;
  std::int64_t scaled = (magnitude + scale / 2) / scale;  // half-up; scale==1 is exact
  std::int64_t unit = 1;
  for (int i = 0; i < decimals; ++i) unit *= 10;
  std::string out = (micros_ < 0 && scaled != 0) ? "-" : "";
  out += std::to_string(scaled / unit);
  if (decimals > 0) {
    std::string frac = std::to_string(scaled % unit);
    out += '.';
    out += std::string(static_cast<std::size_t>(decimals) - frac.size(), '0');
    out += frac;
  }
  return out;
}

}  // namespace cascade
