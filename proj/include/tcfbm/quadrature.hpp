#pragma once

#include <cmath>
#include <numbers>

#include "tcfbm/errors.hpp"
#include "tcfbm/numeric_detail.hpp"

namespace tcfbm {
namespace detail {

// Double-exponential (tanh-sinh) quadrature on (0,1). The integrand receives
// both u and 1-u so endpoint-singular factors can be formed without
// cancellation. Handles integrable endpoint blow-ups up to roughly
// (1-u)^(-0.95); non-finite node values at the extreme tails are treated as
// zero (the node weight there is below double range).
template <typename F>
double tanh_sinh_01(F&& integrand, double abs_tol = 1e-12, int max_level = 12) {
  constexpr double tau_max = 6.1;
  const double pi = std::numbers::pi;
  double value = 0.0;
  double h = 1.0;
  for (int level = 0; level <= max_level; ++level) {
    KahanSum acc;
    const int n = static_cast<int>(tau_max / h);
    for (int k = level == 0 ? 0 : 1; k <= n; k += level == 0 ? 1 : 2) {
      const double tau = k * h;
      const double w = std::exp(-pi * std::sinh(tau));
      const double x = 1.0 / (1.0 + w);
      const double onemx = w / (1.0 + w);
      const double dxdtau = pi * std::cosh(tau) * x * onemx;
      if (dxdtau == 0.0) continue;
      double contrib = integrand(x, onemx) * dxdtau;
      if (k > 0) contrib += integrand(onemx, x) * dxdtau;
      if (std::isfinite(contrib)) acc.add(contrib);
    }
    if (level == 0) {
      value = h * acc.value();
    } else {
      const double prev = value;
      value = 0.5 * prev + h * acc.value();
      const double scale = std::max(1.0, std::fabs(value));
      if (level >= 4 && std::fabs(value - prev) <= abs_tol * scale) return value;
    }
    h *= 0.5;
  }
  throw QuadratureError("tanh_sinh_01: no convergence within level budget");
}

}  // namespace detail
}  // namespace tcfbm
