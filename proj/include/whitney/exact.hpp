#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>

#include "whitney/error.hpp"

namespace whitney {

using i128 = __int128;

/// Reduced fraction num/den with den > 0. Used for reporting exact
/// coordinates; hot paths work on integer numerators directly.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction() = default;
  Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw ConfigError("Fraction with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Fraction& a, const Fraction& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Fraction& a, const Fraction& b) {
    return static_cast<i128>(a.num) * b.den < static_cast<i128>(b.num) * a.den;
  }
  friend bool operator<=(const Fraction& a, const Fraction& b) { return !(b < a); }
  friend std::ostream& operator<<(std::ostream& os, const Fraction& f) {
    return os << f.num << '/' << f.den;
  }
};

/// floor(a / b) for b > 0.
inline i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && (a < 0)) --q;
  return q;
}

/// ceil(a / b) for b > 0.
inline i128 ceil_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && (a > 0)) ++q;
  return q;
}

/// Checked integer power; throws ConfigError on overflow past `limit`.
inline std::int64_t checked_pow(std::int64_t base, int exp, std::int64_t limit) {
  i128 r = 1;
  for (int k = 0; k < exp; ++k) {
    r *= base;
    if (r > limit) throw ConfigError("integer power exceeds supported range");
  }
  return static_cast<std::int64_t>(r);
}

}  // namespace whitney
