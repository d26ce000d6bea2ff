#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tcfbm/moments.hpp"

namespace tcfbm {

// Z(t) = B_H(Y(t)) with B_H fractional Brownian motion, sigma2 = Var B_H(1),
// and Y the inverse of the subordinator described by sub.
struct TfbmModel {
  SubordinatorSpec sub;
  double hurst;
  double sigma2;
};

inline TfbmModel validate_model(const TfbmModel& model) {
  if (!(model.hurst > 0.0 && model.hurst < 1.0))
    throw std::invalid_argument("invalid model: hurst must lie in (0,1)");
  if (!(model.sigma2 > 0.0)) throw std::invalid_argument("invalid model: sigma2 must be > 0");
  validate_spec(model.sub);
  return model;
}

// Fractional Brownian motion covariance, valid for all real times.
inline double fbm_cov(double hurst, double sigma2, double t, double s) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::domain_error("fbm_cov: hurst must lie in (0,1)");
  if (!(sigma2 > 0.0)) throw std::domain_error("fbm_cov: sigma2 must be > 0");
  const double h2 = 2.0 * hurst;
  return 0.5 * sigma2 *
         (std::pow(std::fabs(s), h2) + std::pow(std::fabs(t), h2) -
          std::pow(std::fabs(t - s), h2));
}

// Fractional Gaussian noise autocovariance at integer lag j >= 0.
inline double fgn_autocov(double hurst, double sigma0_2, long j) {
  if (j < 0) throw std::domain_error("fgn_autocov: lag must be >= 0");
  if (j == 0) return sigma0_2;
  if (hurst == 0.5) return 0.0;
  const double h2 = 2.0 * hurst;
  const double jd = static_cast<double>(j);
  return 0.5 * sigma0_2 *
         (std::pow(jd + 1.0, h2) - 2.0 * std::pow(jd, h2) + std::pow(jd - 1.0, h2));
}

// Var Z(t) = sigma2 U^{2H}(t).
inline double var_Z(const TfbmModel& model, double t, const EvalConfig& cfg = {},
                    const InversionConfig& icfg = {}) {
  return model.sigma2 * detail::moment_u_any(model.sub, 2.0 * model.hurst, t, cfg, icfg);
}

// Closed-form covariance for the pure stable family, s <= t after
// symmetrization:
//   (sigma2/2) Gamma(2H+1) { s^{2aH}/Gamma(2aH+1)
//     + t^{2aH} B(a, a(2H-1)+1; s/t) / (Gamma(a) Gamma(a(2H-1)+1)) }.
inline double stable_cov_closed_form(double alpha, double hurst, double sigma2, double t,
                                     double s) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("stable_cov_closed_form: alpha must lie in (0,1)");
  const double b2 = alpha * (2.0 * hurst - 1.0) + 1.0;
  if (!(b2 > 0.0)) throw std::domain_error("stable_cov_closed_form: a(2H-1)+1 must be > 0");
  if (t < s) std::swap(t, s);
  if (s == 0.0) return 0.0;
  const double ah2 = 2.0 * alpha * hurst;
  const double g = gamma_fn(2.0 * hurst + 1.0);
  return 0.5 * sigma2 * g *
         (std::pow(s, ah2) / gamma_fn(ah2 + 1.0) +
          std::pow(t, ah2) * incomplete_beta(alpha, b2, s / t) /
              (gamma_fn(alpha) * gamma_fn(b2)));
}

// Covariance of Z by the defining quadrature:
//   (sigma2/2) { U^{2H}(min) + 2H int_0^min U^{2H-1}(max-y) dU(y) }.
inline double cov_Z_quadrature(const TfbmModel& model, double t, double s,
                               const EvalConfig& cfg = {}, const InversionConfig& icfg = {}) {
  if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("cov_Z: times must be >= 0");
  const double m = std::min(t, s);
  const double M = std::max(t, s);
  if (m == 0.0) return 0.0;
  const double h2 = 2.0 * model.hurst;
  const double gap = M - m;
  const double integral = integrate_against_renewal(
      model.sub, m,
      [&](double, double m_minus_y) {
        return detail::moment_u_any(model.sub, h2 - 1.0, gap + m_minus_y, cfg, icfg);
      },
      cfg, icfg);
  return 0.5 * model.sigma2 *
         (detail::moment_u_any(model.sub, h2, m, cfg, icfg) + h2 * integral);
}

// Covariance of Z. The stable family evaluates both the closed form and the
// quadrature and insists they agree; other families use the quadrature.
inline double cov_Z(const TfbmModel& model, double t, double s, const EvalConfig& cfg = {},
                    const InversionConfig& icfg = {}) {
  if (!(t >= 0.0 && s >= 0.0)) throw std::domain_error("cov_Z: times must be >= 0");
  const double m = std::min(t, s);
  if (m == 0.0) return 0.0;
  if (t == s) return var_Z(model, t, cfg, icfg);
  if (const auto* st = std::get_if<Stable>(&model.sub)) {
    const double closed = stable_cov_closed_form(st->alpha, model.hurst, model.sigma2, t, s);
    const double quad = cov_Z_quadrature(model, t, s, cfg, icfg);
    if (!(std::fabs(closed - quad) <=
          1e-8 * std::max({std::fabs(closed), std::fabs(quad), 1e-300})))
      throw QuadratureError("cov_Z: stable closed form and quadrature disagree");
    return closed;
  }
  return cov_Z_quadrature(model, t, s, cfg, icfg);
}

// corr Z(t), Z(s); for H = 1/2 this is sqrt(U(min)/U(max)).
inline double corr_Z(const TfbmModel& model, double t, double s, const EvalConfig& cfg = {},
                     const InversionConfig& icfg = {}) {
  if (!(t > 0.0 && s > 0.0)) throw std::domain_error("corr_Z: times must be > 0");
  if (t == s) return 1.0;
  if (model.hurst == 0.5) {
    const double um = moment_U(model.sub, 1.0, std::min(t, s), cfg, icfg);
    const double uM = moment_U(model.sub, 1.0, std::max(t, s), cfg, icfg);
    if (!(um > 0.0 && uM > 0.0)) throw std::domain_error("corr_Z: degenerate variance");
    return std::sqrt(um / uM);
  }
  const double vt = var_Z(model, t, cfg, icfg);
  const double vs = var_Z(model, s, cfg, icfg);
  if (!(vt > 0.0 && vs > 0.0)) throw std::domain_error("corr_Z: degenerate variance");
  return cov_Z(model, t, s, cfg, icfg) / std::sqrt(vt * vs);
}

// E|Z(t)-Z(s)|^m: the Gaussian absolute moment
// (2 sigma2)^{m/2} Gamma((m+1)/2) / sqrt(pi) times E|Y(t)-Y(s)|^{mH}.
inline double abs_increment_moment_Z(const TfbmModel& model, double m, double t, double s,
                                     const EvalConfig& cfg = {},
                                     const InversionConfig& icfg = {}) {
  if (!(m > 0.0)) throw std::domain_error("abs_increment_moment_Z: order must be > 0");
  const double prefactor = std::pow(2.0 * model.sigma2, 0.5 * m) *
                           gamma_fn(0.5 * (m + 1.0)) / std::sqrt(std::numbers::pi);
  return prefactor * increment_moment_Y(model.sub, m * model.hurst, t, s, cfg, icfg);
}

// Cov(Z(t)-Z(0), Z(t+v)-Z(v)) for v >= t > 0:
//   sigma2 H int_0^t ( U^{2H-1}(t+v-y) - U^{2H-1}(v-y) ) dU(y).
// Identically zero at H = 1/2.
inline double increment_cov_Z(const TfbmModel& model, double t, double v,
                              const EvalConfig& cfg = {}, const InversionConfig& icfg = {}) {
  if (!(t > 0.0) || !(v >= t)) throw std::domain_error("increment_cov_Z: need v >= t > 0");
  if (model.hurst == 0.5) return 0.0;
  const double h2 = 2.0 * model.hurst;
  const double gap = v - t;
  const double integral = integrate_against_renewal(
      model.sub, t,
      [&](double, double m_minus_y) {
        return detail::moment_u_any(model.sub, h2 - 1.0, v + m_minus_y, cfg, icfg) -
               detail::moment_u_any(model.sub, h2 - 1.0, gap + m_minus_y, cfg, icfg);
      },
      cfg, icfg);
  return model.sigma2 * model.hurst * integral;
}

// One asymptotic regime of a second-order quantity: the approximation is
// leading_value * x^leading_exponent (+ second_value * x^second_exponent
// when a second term is part of the stated expansion), x being the regime
// variable named in description.
struct AsymptoticReport {
  std::string regime;
  double leading_value;
  double leading_exponent;
  double second_value = std::numeric_limits<double>::quiet_NaN();
  double second_exponent = std::numeric_limits<double>::quiet_NaN();
  std::string description;
};

enum class AsymptoticRegime { large_t, small_t, small_s, large_v_increments };

// Evaluate a report's power-law approximation at regime variable x.
inline double evaluate_asymptote(const AsymptoticReport& report, double x) {
  double value = report.leading_value * std::pow(x, report.leading_exponent);
  if (std::isfinite(report.second_exponent))
    value += report.second_value * std::pow(x, report.second_exponent);
  return value;
}

// Stable-family asymptotics. large_t / small_s: the correlation decays as a
// mixture of the powers (s/t)^{aH} and (s/t)^{a(1-H)}; the slower power
// leads. small_t: the variance power law (exact at every scale).
// large_v_increments: increment covariance ~ coef * v^{a(2H-1)-1} at fixed t.
inline AsymptoticReport stable_asymptotics(double alpha, double hurst, double sigma2, double t,
                                           double s, double v,
                                           AsymptoticRegime regime = AsymptoticRegime::large_t) {
  (void)v;
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("stable_asymptotics: alpha must lie in (0,1)");
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("stable_asymptotics: hurst must lie in (0,1)");
  AsymptoticReport report;
  switch (regime) {
    case AsymptoticRegime::large_t:
    case AsymptoticRegime::small_s: {
      const bool in_t = regime == AsymptoticRegime::large_t;
      report.regime = in_t ? "t->infinity" : "s->0";
      const double ratio_ref = in_t ? s : 1.0 / t;
      const double sign = in_t ? -1.0 : 1.0;
      if (hurst == 0.5) {
        report.leading_value = std::pow(ratio_ref, 0.5 * alpha);
        report.leading_exponent = sign * 0.5 * alpha;
        report.description = "correlation ~ (s/t)^(a/2), exact two-power collapse at H=1/2";
        return report;
      }
      const double b2 = alpha * (2.0 * hurst - 1.0) + 1.0;
      const double beta_full = gamma_fn(alpha) * gamma_fn(b2) / gamma_fn(2.0 * alpha * hurst + 1.0);
      const double coef_slow = 1.0 / (2.0 * alpha * beta_full);
      const double e_slow = alpha * (1.0 - hurst);
      const double e_fast = alpha * hurst;
      const double slow_value = coef_slow * std::pow(ratio_ref, e_slow);
      const double fast_value = 0.5 * std::pow(ratio_ref, e_fast);
      const bool slow_leads = hurst > 0.5;
      report.leading_value = slow_leads ? slow_value : fast_value;
      report.leading_exponent = sign * (slow_leads ? e_slow : e_fast);
      report.second_value = slow_leads ? fast_value : slow_value;
      report.second_exponent = sign * (slow_leads ? e_fast : e_slow);
      report.description =
          in_t ? "correlation decay in t at fixed s: mixture of powers aH and a(1-H)"
               : "correlation decay in s at fixed t: mixture of powers aH and a(1-H)";
      return report;
    }
    case AsymptoticRegime::small_t:
      report.regime = "t->0";
      report.leading_value =
          sigma2 * gamma_fn(2.0 * hurst + 1.0) / gamma_fn(2.0 * alpha * hurst + 1.0);
      report.leading_exponent = 2.0 * alpha * hurst;
      report.description = "variance power law, exact at all scales for the stable family";
      return report;
    case AsymptoticRegime::large_v_increments:
      report.regime = "v->infinity increments";
      report.leading_value = 0.5 * sigma2 * gamma_fn(2.0 * hurst + 1.0) *
                             std::pow(t, alpha + 1.0) / gamma_fn(alpha + 1.0) *
                             detail::reciprocal_gamma(alpha * (2.0 * hurst - 1.0));
      report.leading_exponent = alpha * (2.0 * hurst - 1.0) - 1.0;
      report.description = "increment covariance decay in v at fixed t; zero at H=1/2";
      return report;
  }
  throw std::invalid_argument("stable_asymptotics: unknown regime");
}

// Mixture-family variance asymptotics: the smaller index alpha1 governs
// t->infinity, the larger index alpha2 governs t->0.
inline AsymptoticReport mixture_asymptotics(const StableMixture& spec, double hurst,
                                            double sigma2, double t,
                                            AsymptoticRegime regime = AsymptoticRegime::large_t) {
  (void)t;
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("mixture_asymptotics: hurst must lie in (0,1)");
  const double h2 = 2.0 * hurst;
  AsymptoticReport report;
  if (regime == AsymptoticRegime::large_t) {
    report.regime = "t->infinity";
    report.leading_value = sigma2 * gamma_fn(h2 + 1.0) /
                           (std::pow(spec.c1, h2) * gamma_fn(spec.alpha1 * h2 + 1.0));
    report.leading_exponent = spec.alpha1 * h2;
    report.description = "variance leading term for t -> infinity";
    if (spec.c1 < 1e-8) report.description += "; degenerate: c1 -> 0 blows up the constant";
    return report;
  }
  if (regime == AsymptoticRegime::small_t) {
    report.regime = "t->0";
    report.leading_value = sigma2 * gamma_fn(h2 + 1.0) /
                           (std::pow(spec.c2, h2) * gamma_fn(spec.alpha2 * h2 + 1.0));
    report.leading_exponent = spec.alpha2 * h2;
    report.description = "variance leading term for t -> 0";
    if (spec.c2 < 1e-8) report.description += "; degenerate: c2 -> 0 blows up the constant";
    return report;
  }
  throw std::invalid_argument("mixture_asymptotics: regime must be large_t or small_t");
}

// Tempered-family asymptotics: Karamata variance growth for t -> infinity,
// the stable-like renewal function for t -> 0, and the H = 1/2 small-s
// correlation decay at fixed t.
inline AsymptoticReport tempered_asymptotics(const TemperedStable& spec, double hurst,
                                             double sigma2, double t, double s,
                                             AsymptoticRegime regime = AsymptoticRegime::large_t,
                                             const EvalConfig& cfg = {},
                                             const InversionConfig& icfg = {}) {
  (void)s;
  if (!(hurst > 0.0 && hurst < 1.0))
    throw std::domain_error("tempered_asymptotics: hurst must lie in (0,1)");
  const double h2 = 2.0 * hurst;
  AsymptoticReport report;
  if (regime == AsymptoticRegime::large_t) {
    report.regime = "t->infinity";
    report.leading_value =
        sigma2 / (std::pow(spec.alpha, h2) * std::pow(spec.a, h2 * (spec.alpha - 1.0)));
    report.leading_exponent = h2;
    report.description =
        "variance ~ sigma2 t^{2H} / (alpha^{2H} a^{2H(alpha-1)}) for t -> infinity";
    return report;
  }
  if (regime == AsymptoticRegime::small_t) {
    report.regime = "t->0";
    report.leading_value = detail::reciprocal_gamma(1.0 + spec.alpha);
    report.leading_exponent = spec.alpha;
    report.description = "renewal function ~ t^a/Gamma(1+a) for t -> 0";
    return report;
  }
  if (regime == AsymptoticRegime::small_s) {
    if (hurst != 0.5)
      throw std::invalid_argument("tempered_asymptotics: small-s correlation needs H = 1/2");
    report.regime = "s->0";
    const double u_t = moment_U(SubordinatorSpec{spec}, 1.0, t, cfg, icfg);
    report.leading_value = 1.0 / std::sqrt(gamma_fn(1.0 + spec.alpha) * u_t);
    report.leading_exponent = 0.5 * spec.alpha;
    report.description = "correlation ~ s^{a/2}/sqrt(Gamma(1+a) U(t)) for s -> 0 at fixed t";
    return report;
  }
  throw std::invalid_argument("tempered_asymptotics: unsupported regime");
}

}  // namespace tcfbm
