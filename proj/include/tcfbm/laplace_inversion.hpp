#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcfbm/config.hpp"
#include "tcfbm/errors.hpp"
#include "tcfbm/numeric_detail.hpp"

namespace tcfbm {

namespace detail {

// Fixed-Talbot rule (Abate & Valko). Contour s(theta) = r theta (cot theta + i),
// r = 2M/(5t); exact for transforms analytic off the negative real axis.
template <class F>
double talbot_invert(F&& transform, double t, int node_count) {
  const int m = node_count;
  const double r = 2.0 * m / (5.0 * t);
  KahanSum acc;
  acc.add(0.5 * std::exp(r * t) * transform(std::complex<double>(r, 0.0)).real());
  for (int k = 1; k < m; ++k) {
    const double theta = k * std::numbers::pi / m;
    const double cot = std::cos(theta) / std::sin(theta);
    const std::complex<double> s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    const std::complex<double> term =
        std::exp(s * t) * transform(s) * std::complex<double>(1.0, sigma);
    acc.add(term.real());
  }
  return acc.value() * r / m;
}

// Stehfest weights; long double keeps the factorial cancellation tolerable.
inline std::vector<long double> stehfest_weights(int n) {
  const int half = n / 2;
  std::vector<long double> fact(static_cast<std::size_t>(n) + 1, 1.0L);
  for (int i = 1; i <= n; ++i) fact[i] = fact[i - 1] * i;
  std::vector<long double> zeta(static_cast<std::size_t>(n) + 1, 0.0L);
  for (int k = 1; k <= n; ++k) {
    long double sum = 0.0L;
    const int j_lo = (k + 1) / 2;
    const int j_hi = std::min(k, half);
    for (int j = j_lo; j <= j_hi; ++j) {
      long double num = std::pow(static_cast<long double>(j), half) * fact[2 * j];
      long double den = fact[half - j] * fact[j] * fact[j - 1] * fact[k - j] * fact[2 * j - k];
      sum += num / den;
    }
    zeta[k] = (((half + k) % 2) ? -1.0L : 1.0L) * sum;
  }
  return zeta;
}

template <class F>
double stehfest_invert(F&& transform, double t, int node_count) {
  const auto zeta = stehfest_weights(node_count);
  const double l2t = std::numbers::ln2 / t;
  long double acc = 0.0L;
  for (int k = 1; k <= node_count; ++k) {
    double fk = transform(std::complex<double>(k * l2t, 0.0)).real();
    acc += zeta[k] * static_cast<long double>(fk);
  }
  return static_cast<double>(acc) * l2t;
}

// Truncation decays with the node count while roundoff amplification grows;
// the max of the two is the attainable accuracy.
inline double expected_inversion_accuracy(InversionMethod method, int node_count) {
  const double eps = std::numeric_limits<double>::epsilon();
  if (method == InversionMethod::fixed_talbot)
    return std::max(std::pow(10.0, -0.6 * node_count), eps * std::exp(0.4 * node_count));
  return std::max(std::pow(10.0, -0.34 * node_count), eps * std::pow(10.0, 0.35 * node_count));
}

}  // namespace detail

// Evaluates f(t) from its Laplace transform F via the configured rule, then
// repeats at a perturbed node count; a disagreement beyond 100x the method's
// expected accuracy raises InversionError.
template <class F>
double invert_laplace_at(F&& transform, double t, const InversionConfig& cfg = {}) {
  validate(cfg);
  if (!(t > 0.0)) throw std::domain_error("invert_laplace_at: t must be > 0");
  double primary = 0.0, check = 0.0;
  const int check_nodes =
      cfg.node_count - (cfg.method == InversionMethod::fixed_talbot ? 4 : 2);
  if (cfg.method == InversionMethod::fixed_talbot) {
    check = detail::talbot_invert(transform, t, check_nodes);
    primary = detail::talbot_invert(transform, t, cfg.node_count);
  } else {
    check = detail::stehfest_invert(transform, t, check_nodes);
    primary = detail::stehfest_invert(transform, t, cfg.node_count);
  }
  const double tol = detail::expected_inversion_accuracy(cfg.method, check_nodes);
  // roundoff leaves an absolute floor tied to the contour scale, so tiny
  // originals must not be judged on relative disagreement alone
  const double eps = std::numeric_limits<double>::epsilon();
  const double abs_floor = cfg.method == InversionMethod::fixed_talbot
                               ? eps * std::exp(0.4 * check_nodes)
                               : eps * std::pow(10.0, 0.35 * check_nodes);
  const double scale = std::max({std::fabs(primary), std::fabs(check), 1e-300});
  const double allowed = 100.0 * (tol * scale + abs_floor);
  if (!std::isfinite(primary) || std::fabs(primary - check) > allowed) {
    throw InversionError(
        "invert_laplace_at: node counts " + std::to_string(cfg.node_count) + "/" +
        std::to_string(check_nodes) + " disagree (" + detail::float_to_string(primary) +
        " vs " + detail::float_to_string(check) + ") beyond 100x expected accuracy " +
        detail::float_to_string(allowed));
  }
  return primary;
}

}  // namespace tcfbm
