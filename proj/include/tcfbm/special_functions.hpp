#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include "tcfbm/config.hpp"
#include "tcfbm/errors.hpp"
#include "tcfbm/laplace_inversion.hpp"
#include "tcfbm/numeric_detail.hpp"

namespace tcfbm {

// Gamma(x) for x > 0.
inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma_fn: x must be > 0");
  if (x > 171.62)
    throw std::overflow_error("gamma_fn: overflow for x > 171.62");
  return std::tgamma(x);
}

// P(x; v) = gamma(x; v) / Gamma(v), the regularised lower incomplete gamma
// function of integration limit x >= 0 and exponent v > 0.
inline double regularized_lower_gamma(double x, double v, const EvalConfig& cfg = {}) {
  if (!(v > 0.0)) throw std::domain_error("regularized_lower_gamma: v must be > 0");
  if (!(x >= 0.0) || !std::isfinite(x))
    throw std::domain_error("regularized_lower_gamma: x must be finite and >= 0");
  if (x == 0.0) return 0.0;
  const double eps = std::max(cfg.rel_tol, std::numeric_limits<double>::epsilon());
  const double lpre = v * std::log(x) - x - std::lgamma(v);
  if (x < v + 1.0) {
    double ap = v;
    double del = 1.0 / v;
    double sum = del;
    for (int n = 1; n <= cfg.max_terms; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * eps) return sum * std::exp(lpre);
    }
    throw ConvergenceError("regularized_lower_gamma: series stalled");
  }
  // Lentz continued fraction for the upper tail Q
  const double fpmin = 1e-300;
  double b = x + 1.0 - v;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= cfg.max_terms; ++i) {
    double an = -static_cast<double>(i) * (i - v);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double delt = d * c;
    h *= delt;
    if (std::fabs(delt - 1.0) < eps) return 1.0 - std::exp(lpre) * h;
  }
  throw ConvergenceError("regularized_lower_gamma: continued fraction stalled");
}

// gamma(x; v) = integral_0^x e^{-u} u^{v-1} du, unnormalised.
inline double lower_incomplete_gamma(double x, double v, const EvalConfig& cfg = {}) {
  double p = regularized_lower_gamma(x, v, cfg);
  double lg = std::lgamma(v);
  if (lg > 708.0) {
    if (p == 0.0) return 0.0;
    double lr = std::log(p) + lg;
    if (lr > 709.0)
      throw std::overflow_error("lower_incomplete_gamma: result overflows");
    return std::exp(lr);
  }
  return p * std::tgamma(v);
}

namespace detail {

inline double beta_cf(double a, double b, double x, const EvalConfig& cfg) {
  const double eps = std::max(cfg.rel_tol, std::numeric_limits<double>::epsilon());
  const double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= cfg.max_terms; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double delt = d * c;
    h *= delt;
    if (std::fabs(delt - 1.0) < eps) return h;
  }
  throw ConvergenceError("incomplete_beta: continued fraction stalled");
}

}  // namespace detail

// B(a, b; z) = integral_0^z u^{a-1}(1-u)^{b-1} du, unnormalised, 0 <= z <= 1.
inline double incomplete_beta(double a, double b, double z, const EvalConfig& cfg = {}) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("incomplete_beta: a and b must be > 0");
  if (!(z >= 0.0 && z <= 1.0))
    throw std::domain_error("incomplete_beta: z must lie in [0, 1]");
  if (z == 0.0) return 0.0;
  const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  if (z == 1.0) return std::exp(lbeta);
  const double front = std::exp(a * std::log(z) + b * std::log1p(-z));
  if (z < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, z, cfg) / a;
  return std::exp(lbeta) - front * detail::beta_cf(b, a, 1.0 - z, cfg) / b;
}

namespace detail {

struct SeriesEval {
  double value = 0.0;
  double rel_err = std::numeric_limits<double>::infinity();
  bool usable = false;
};

// Power series sum_j (g)_j z^j / (j! Gamma(alpha j + beta)); g = 1 gives the
// two-parameter function. Coefficients tracked in log space; the reported
// rel_err accounts for cancellation through the largest term seen.
inline SeriesEval prabhakar_power_series(double alpha, double beta, double g, double z,
                                         const EvalConfig& cfg) {
  const double eps = std::max(cfg.rel_tol, std::numeric_limits<double>::epsilon());
  const double log_az = std::log(std::fabs(z));
  KahanSum sum;
  double max_abs = 0.0;
  double prev_mag = std::numeric_limits<double>::infinity();
  double lcoef = 0.0;  // log |(g)_j / j!|
  double csign = 1.0;
  int shrink_run = 0;
  bool terminated = false;
  SeriesEval out;
  double tail = std::numeric_limits<double>::infinity();
  for (int j = 0; j < cfg.max_terms; ++j) {
    const double mag = std::exp(lcoef + j * log_az - std::lgamma(alpha * j + beta));
    double term = csign * ((z < 0.0 && (j & 1)) ? -mag : mag);
    sum.add(term);
    max_abs = std::max(max_abs, mag);
    const bool shrinking = mag < prev_mag;
    prev_mag = mag;
    if (shrinking && mag <= 0.1 * eps * std::fabs(sum.value()) + 1e-320) {
      if (++shrink_run >= 3) {
        terminated = true;
        tail = mag;
        break;
      }
    } else {
      shrink_run = 0;
    }
    const double gj = g + j;
    if (gj == 0.0) {  // Pochhammer hit zero: the series is a polynomial, now exact
      terminated = true;
      tail = 0.0;
      break;
    }
    lcoef += std::log(std::fabs(gj)) - std::log1p(static_cast<double>(j));
    if (gj < 0.0) csign = -csign;
  }
  out.value = sum.value();
  if (!terminated || !std::isfinite(out.value)) return out;  // not usable
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * max_abs + tail;
  out.rel_err = noise / std::max(std::fabs(out.value), 1e-300);
  out.usable = true;
  return out;
}

// Algebraic expansion for z -> -inf:
//   E^g_{alpha,beta}(z) ~ sum_j c_j x^{-g-j} / Gamma(beta - alpha (g+j)),
//   x = -z, c_0 = 1, c_{j+1} = -c_j (g+j)/(j+1).
// Truncated at the smallest term; rel_err reports that term's size.
inline SeriesEval prabhakar_asymptotic(double alpha, double beta, double g, double z,
                                       const EvalConfig& cfg) {
  const double eps = std::max(cfg.rel_tol, std::numeric_limits<double>::epsilon());
  const double lx = std::log(-z);
  KahanSum sum;
  double c = 1.0;
  double prev_nonzero = std::numeric_limits<double>::infinity();
  SeriesEval out;
  for (int j = 0; j < 400; ++j) {
    const double rg = reciprocal_gamma(beta - alpha * (g + j));
    const double term = c * rg * std::exp(-(g + j) * lx);
    const double mag = std::fabs(term);
    if (mag > 0.0) {
      if (mag >= prev_nonzero) {  // divergent tail reached; stop before it
        out.value = sum.value();
        out.rel_err = prev_nonzero / std::max(std::fabs(out.value), 1e-300);
        out.usable = std::isfinite(out.value);
        return out;
      }
      sum.add(term);
      prev_nonzero = mag;
      if (mag <= 0.1 * eps * std::fabs(sum.value())) {
        out.value = sum.value();
        out.rel_err = mag / std::max(std::fabs(out.value), 1e-300);
        out.usable = true;
        return out;
      }
    }
    c *= -(g + j) / (j + 1.0);
  }
  out.value = sum.value();
  out.rel_err = prev_nonzero / std::max(std::fabs(out.value), 1e-300);
  out.usable = std::isfinite(out.value) && std::isfinite(prev_nonzero);
  return out;
}

// Bromwich route through L[t^{beta-1} E^g_{alpha,beta}(z t^alpha)](s)
//   = s^{alpha g - beta} (s^alpha - z)^{-g},  evaluated at t = 1.
// For z < 0 and alpha < 1 the transform is analytic off the negative real
// axis, which is exactly the Talbot requirement.
inline double prabhakar_inversion(double alpha, double beta, double g, double z,
                                  const InversionConfig& icfg) {
  auto transform = [=](std::complex<double> s) {
    return std::pow(s, alpha * g - beta) * std::pow(std::pow(s, alpha) - z, -g);
  };
  return invert_laplace_at(transform, 1.0, icfg);
}

// The truncation estimate of the algebraic expansion is not trustworthy on
// its own: contributions it cannot represent are sometimes orders of
// magnitude above its smallest term. Accept the expansion only when it also
// agrees with an independent numerical inversion at that method's accuracy;
// otherwise return the inversion value.
inline double asym_cross_checked(double alpha, double beta, double g, double z, double tol,
                                 const EvalConfig& cfg, const InversionConfig& icfg) {
  const auto a = prabhakar_asymptotic(alpha, beta, g, z, cfg);
  const double inv = prabhakar_inversion(alpha, beta, g, z, icfg);
  if (a.usable && a.rel_err <= tol) {
    const int check_nodes =
        icfg.node_count - (icfg.method == InversionMethod::fixed_talbot ? 4 : 2);
    const double itol = 20.0 * expected_inversion_accuracy(icfg.method, check_nodes);
    const double scale = std::max(std::fabs(a.value), std::fabs(inv));
    if (std::fabs(a.value - inv) <= itol * scale) return a.value;
  }
  return inv;
}

}  // namespace detail

// Prabhakar (three-parameter Mittag-Leffler) function E^g_{alpha,beta}(z) for
// real g. Branch selection: power series inside cfg.series_radius or for
// z >= 0; beyond the radius the algebraic expansion cross-checked against a
// numerical Bromwich inversion, which also serves as the fallback. Relative
// accuracy is cfg.rel_tol on the series branch and a few 1e-9 worst case
// elsewhere (inversion-limited).
inline double prabhakar(double alpha, double beta, double g, double z,
                        const EvalConfig& cfg = {}, const InversionConfig& icfg = {}) {
  validate(cfg);
  if (!(alpha > 0.0)) throw std::domain_error("prabhakar: alpha must be > 0");
  if (!(beta > 0.0)) throw std::domain_error("prabhakar: beta must be > 0");
  if (!std::isfinite(z) || !std::isfinite(g))
    throw std::domain_error("prabhakar: g and z must be finite");
  if (g == 0.0 || z == 0.0) return detail::reciprocal_gamma(beta);
  const double tol = std::max(cfg.rel_tol, 8.0 * std::numeric_limits<double>::epsilon());
  if (z > 0.0) {
    auto s = detail::prabhakar_power_series(alpha, beta, g, z, cfg);
    if (s.usable && s.rel_err <= tol) return s.value;
    throw ConvergenceError("prabhakar: series unreachable for z = " +
                           detail::float_to_string(z));
  }
  if (std::fabs(z) <= cfg.series_radius) {
    auto s = detail::prabhakar_power_series(alpha, beta, g, z, cfg);
    if (s.usable && s.rel_err <= tol) return s.value;
  }
  return detail::asym_cross_checked(alpha, beta, g, z, tol, cfg, icfg);
}

// Two-parameter Mittag-Leffler function E_{alpha,beta}(z).
inline double mittag_leffler(double alpha, double beta, double z,
                             const EvalConfig& cfg = {}, const InversionConfig& icfg = {}) {
  return prabhakar(alpha, beta, 1.0, z, cfg, icfg);
}

namespace detail {

inline double kummer_series(double a, double b, double x, const EvalConfig& cfg) {
  const double eps = std::max(cfg.rel_tol, std::numeric_limits<double>::epsilon());
  KahanSum sum;
  double term = 1.0;
  double max_abs = 1.0;
  sum.add(term);
  int shrink_run = 0;
  bool done = false;
  for (int k = 0; k < cfg.max_terms && !done; ++k) {
    if (a + k == 0.0) {  // Pochhammer hit zero: the series is a polynomial
      done = true;
      break;
    }
    const double prev = std::fabs(term);
    term *= (a + k) * x / ((b + k) * (k + 1.0));
    sum.add(term);
    if (!std::isfinite(term))
      throw std::overflow_error("kummer_m: series overflow, |x| too large");
    max_abs = std::max(max_abs, std::fabs(term));
    if (std::fabs(term) < prev && std::fabs(term) <= 0.1 * eps * std::fabs(sum.value())) {
      if (++shrink_run >= 2) done = true;
    } else {
      shrink_run = 0;
    }
  }
  if (!done) throw ConvergenceError("kummer_m: series stalled");
  const double noise = 8.0 * std::numeric_limits<double>::epsilon() * max_abs;
  if (noise > 1e-8 * std::max(std::fabs(sum.value()), 1e-300))
    throw ConvergenceError("kummer_m: catastrophic cancellation");
  return sum.value();
}

}  // namespace detail

// Kummer confluent hypergeometric M(a, b, x) for a, b > 0. Negative x is
// routed through M(a, b, x) = e^x M(b-a, b, -x) so the series stays
// sign-stable whenever b >= a.
inline double kummer_m(double a, double b, double x, const EvalConfig& cfg = {}) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("kummer_m: a and b must be > 0");
  if (!std::isfinite(x)) throw std::domain_error("kummer_m: x must be finite");
  if (x == 0.0) return 1.0;
  if (x < 0.0) return std::exp(x) * detail::kummer_series(b - a, b, -x, cfg);
  return detail::kummer_series(a, b, x, cfg);
}

}  // namespace tcfbm
