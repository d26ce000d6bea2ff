#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include "tcfbm/config.hpp"
#include "tcfbm/errors.hpp"
#include "tcfbm/laplace_inversion.hpp"
#include "tcfbm/quadrature.hpp"
#include "tcfbm/special_functions.hpp"
#include "tcfbm/subordinator.hpp"

namespace tcfbm {

// Laplace transform of the kappa-th moment function of the inverse process:
// L[U^gamma](lambda) = Gamma(1+gamma) / (lambda phi(lambda)^gamma), gamma > -1.
inline double laplace_U_moment(const SubordinatorSpec& spec, double gamma, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("laplace_U_moment: lambda must be > 0");
  if (!(gamma > -1.0)) throw std::domain_error("laplace_U_moment: gamma must be > -1");
  const double phi = laplace_exponent(spec, lambda);
  if (!(phi > 0.0))
    throw std::domain_error("laplace_U_moment: phi(lambda) vanishes at lambda > 0");
  return gamma_fn(1.0 + gamma) / (lambda * std::pow(phi, gamma));
}

namespace detail {

inline std::complex<double> laplace_U_moment_c(const SubordinatorSpec& spec, double gamma,
                                               std::complex<double> lambda) {
  return gamma_fn(1.0 + gamma) / (lambda * std::pow(phi_eval(spec, lambda), gamma));
}

// e^{-x} * sum_{n>=0} x^{alpha n} / Gamma(alpha(n+1)) evaluated stably; this
// equals U'(y) / y^{alpha-1} for the tempered family with x = a y. Terms are
// positive and unimodal; each is formed in log space so the partial sums
// never overflow.
inline double tempered_density_factor(double alpha, double x, const EvalConfig& cfg) {
  if (x == 0.0) return reciprocal_gamma(alpha);
  const double lx = std::log(x);
  KahanSum sum;
  bool past_peak = false;
  for (int n = 0; n < 100000; ++n) {
    const double v = alpha * (n + 1);
    const double term = std::exp(alpha * n * lx - std::lgamma(v) - x);
    sum.add(term);
    if (v > x) past_peak = true;
    if (past_peak && term <= cfg.rel_tol * sum.value() && n >= 1) return sum.value();
  }
  throw ConvergenceError("tempered_density_factor: series did not converge");
}

// U^kappa(t) for kappa > -1. Negative orders arise only inside increment
// integrands, where the U^{kappa-1} factor has kappa < 1.
inline double moment_u_any(const SubordinatorSpec& spec, double kappa, double t,
                           const EvalConfig& cfg, const InversionConfig& icfg) {
  if (!(t >= 0.0)) throw std::domain_error("moment_U: t must be >= 0");
  if (!(kappa > -1.0)) throw std::domain_error("moment_U: order must be > -1");
  if (kappa == 0.0) return 1.0;
  if (t == 0.0)
    return kappa > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) {
          return gamma_fn(kappa + 1.0) * std::pow(t, f.alpha * kappa) *
                 reciprocal_gamma(f.alpha * kappa + 1.0);
        } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
          return std::pow(t / f.mu, kappa);
        } else if constexpr (std::is_same_v<T, StableMixture>) {
          const double d = f.alpha2 - f.alpha1;
          const double z = -f.c1 * std::pow(t, d) / f.c2;
          return gamma_fn(kappa + 1.0) * std::pow(f.c2, -kappa) *
                 std::pow(t, f.alpha2 * kappa) *
                 prabhakar(d, f.alpha2 * kappa + 1.0, kappa, z, cfg, icfg);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          if (kappa == 1.0) {
            const double pre = std::pow(f.a, -f.alpha);
            KahanSum sum;
            for (int n = 0; n < 10000; ++n) {
              const double term = pre * regularized_lower_gamma(f.a * t, f.alpha * (n + 1));
              sum.add(term);
              if (n >= 1 && term <= cfg.rel_tol * sum.value()) return sum.value();
            }
            throw ConvergenceError("moment_U: tempered renewal series did not converge");
          }
          return invert_laplace_at(
              [&](std::complex<double> lam) { return laplace_U_moment_c(spec, kappa, lam); }, t,
              icfg);
        } else {
          return invert_laplace_at(
              [&](std::complex<double> lam) { return laplace_U_moment_c(spec, kappa, lam); }, t,
              icfg);
        }
      },
      spec);
}

}  // namespace detail

// U^kappa(t) = E[Y(t)^kappa]; closed form per family where available,
// numerical Laplace inversion of laplace_U_moment otherwise.
inline double moment_U(const SubordinatorSpec& spec, double kappa, double t,
                       const EvalConfig& cfg = {}, const InversionConfig& icfg = {}) {
  if (!(kappa > 0.0)) throw std::domain_error("moment_U: kappa must be > 0");
  return detail::moment_u_any(spec, kappa, t, cfg, icfg);
}

// U'(t), the density of the renewal measure dU. Diverges like t^{e-1}
// (e = small_time_exponent) as t -> 0; integrate against it via
// integrate_against_renewal instead of evaluating near 0.
inline double renewal_density(const SubordinatorSpec& spec, double t, const EvalConfig& cfg = {},
                              const InversionConfig& icfg = {}) {
  if (!(t > 0.0)) throw std::domain_error("renewal_density: t must be > 0");
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) {
          return std::pow(t, f.alpha - 1.0) * detail::reciprocal_gamma(f.alpha);
        } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
          return 1.0 / f.mu;
        } else if constexpr (std::is_same_v<T, StableMixture>) {
          const double d = f.alpha2 - f.alpha1;
          const double z = -f.c1 * std::pow(t, d) / f.c2;
          return std::pow(t, f.alpha2 - 1.0) / f.c2 * mittag_leffler(d, f.alpha2, z, cfg, icfg);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          return std::pow(t, f.alpha - 1.0) *
                 detail::tempered_density_factor(f.alpha, f.a * t, cfg);
        } else {
          return invert_laplace_at(
              [&](std::complex<double> lam) { return 1.0 / detail::phi_eval(spec, lam); }, t,
              icfg);
        }
      },
      spec);
}

// Integral of f against the renewal measure: I = int_0^m f(y) U'(y) dy.
// The substitution y = m u^{1/e} (e = small_time_exponent) absorbs the
// endpoint singularity of U'; the integrand receives y and m-y, the latter
// formed without cancellation. f may blow up integrably as y -> m.
template <typename F>
double integrate_against_renewal(const SubordinatorSpec& spec, double m, F&& f,
                                 const EvalConfig& cfg = {}, const InversionConfig& icfg = {}) {
  if (!(m >= 0.0)) throw std::domain_error("integrate_against_renewal: m must be >= 0");
  if (m == 0.0) return 0.0;
  const double e = small_time_exponent(spec);
  // density_factor(y) = U'(y) dy/du with the pure power y^{e-1} already
  // cancelled against the substitution jacobian.
  auto density_factor = [&](double y) -> double {
    return std::visit(
        [&](const auto& fam) -> double {
          using T = std::decay_t<decltype(fam)>;
          if constexpr (std::is_same_v<T, Stable>) {
            return std::pow(m, fam.alpha) / gamma_fn(fam.alpha + 1.0);
          } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
            return m / fam.mu;
          } else if constexpr (std::is_same_v<T, StableMixture>) {
            const double d = fam.alpha2 - fam.alpha1;
            const double z = -fam.c1 * std::pow(y, d) / fam.c2;
            return std::pow(m, fam.alpha2) / (fam.c2 * fam.alpha2) *
                   mittag_leffler(d, fam.alpha2, z, cfg, icfg);
          } else if constexpr (std::is_same_v<T, TemperedStable>) {
            return std::pow(m, fam.alpha) / fam.alpha *
                   detail::tempered_density_factor(fam.alpha, fam.a * y, cfg);
          } else {
            if (y == 0.0) return 0.0;
            return m * renewal_density(spec, y, cfg, icfg);
          }
        },
        spec);
  };
  return detail::tanh_sinh_01([&](double u, double onemu) {
    const double y = m * std::exp(std::log(u) / e);
    const double m_minus_y = m * (-std::expm1(std::log1p(-onemu) / e));
    return f(y, m_minus_y) * density_factor(y);
  });
}

// E|Y(t) - Y(s)|^kappa = U^kappa(max) - kappa int_0^min U^{kappa-1}(max-y) dU(y).
inline double increment_moment_Y(const SubordinatorSpec& spec, double kappa, double t, double s,
                                 const EvalConfig& cfg = {}, const InversionConfig& icfg = {}) {
  if (!(kappa > 0.0)) throw std::domain_error("increment_moment_Y: kappa must be > 0");
  if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("increment_moment_Y: times must be >= 0");
  const double m = std::min(t, s);
  const double M = std::max(t, s);
  if (m == M) return 0.0;
  const double head = detail::moment_u_any(spec, kappa, M, cfg, icfg);
  if (m == 0.0) return head;
  const double gap = M - m;
  const double tail =
      kappa * integrate_against_renewal(
                  spec, m,
                  [&](double, double m_minus_y) {
                    return detail::moment_u_any(spec, kappa - 1.0, gap + m_minus_y, cfg, icfg);
                  },
                  cfg, icfg);
  const double value = head - tail;
  if (value < 0.0 && value > -1e-10 * head) return 0.0;
  return value;
}

// Cov[Y(t),Y(s)] = (1/2) U^2(min) + int_0^min U(max-y) dU(y) - U(max) U(min).
inline double cov_Y(const SubordinatorSpec& spec, double t, double s, const EvalConfig& cfg = {},
                    const InversionConfig& icfg = {}) {
  if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("cov_Y: times must be >= 0");
  if (std::holds_alternative<DeterministicDrift>(spec)) return 0.0;
  const double m = std::min(t, s);
  const double M = std::max(t, s);
  if (m == 0.0) return 0.0;
  const double gap = M - m;
  const double cross = integrate_against_renewal(
      spec, m,
      [&](double, double m_minus_y) {
        return detail::moment_u_any(spec, 1.0, gap + m_minus_y, cfg, icfg);
      },
      cfg, icfg);
  return 0.5 * detail::moment_u_any(spec, 2.0, m, cfg, icfg) + cross -
         detail::moment_u_any(spec, 1.0, M, cfg, icfg) *
             detail::moment_u_any(spec, 1.0, m, cfg, icfg);
}

}  // namespace tcfbm
