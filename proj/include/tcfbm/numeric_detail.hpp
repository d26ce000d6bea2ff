#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

namespace tcfbm::detail {

// Compensated accumulator; keeps long sums at O(eps) instead of O(n eps).
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double term) {
    double y = term - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

// sin(pi x) with the integer part of the argument reduced exactly.
inline double sin_pi(double x) {
  double r = std::remainder(x, 2.0);
  return std::sin(std::numbers::pi * r);
}

// 1/Gamma(x) on the whole real line; zero at the poles x = 0, -1, -2, ...
// Saturates to +-inf when 1/Gamma overflows (deep negative x).
inline double reciprocal_gamma(double x) {
  if (x > 0.5) {
    if (x > 171.61) return 0.0;
    return 1.0 / std::tgamma(x);
  }
  double s = sin_pi(x);
  if (s == 0.0) return 0.0;
  double v = std::lgamma(1.0 - x) + std::log(std::fabs(s)) - std::log(std::numbers::pi);
  if (v > 709.0) return std::copysign(std::numeric_limits<double>::infinity(), s);
  return std::copysign(std::exp(v), s);
}

// Shortest decimal string that round-trips to the same double.
inline std::string float_to_string(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string float_to_string(std::uint64_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace tcfbm::detail
