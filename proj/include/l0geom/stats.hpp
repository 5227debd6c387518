#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace l0geom {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double half_width() const { return 0.5 * (high - low); }
};

/// Wilson score interval for `successes` out of `trials`.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double z = kZ95) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: zero trials");
  if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double spread = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - spread), std::min(1.0, centre + spread)};
}

/// A value with a standard deviation; first-order error propagation for
/// independent terms.
struct Uncertain {
  double value = 0.0;
  double sigma = 0.0;

  friend Uncertain operator+(Uncertain a, Uncertain b) {
    return {a.value + b.value, std::hypot(a.sigma, b.sigma)};
  }
  friend Uncertain operator-(Uncertain a, Uncertain b) {
    return {a.value - b.value, std::hypot(a.sigma, b.sigma)};
  }
  friend Uncertain operator*(double s, Uncertain a) { return {s * a.value, std::abs(s) * a.sigma}; }
  friend Uncertain operator*(Uncertain a, Uncertain b) {
    return {a.value * b.value, std::hypot(a.sigma * b.value, a.value * b.sigma)};
  }
  friend Uncertain operator/(Uncertain a, Uncertain b) {
    const double q = a.value / b.value;
    return {q, std::hypot(a.sigma / b.value, q * b.sigma / b.value)};
  }
};

}  // namespace l0geom
