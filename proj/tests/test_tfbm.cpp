#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support/test_stats.hpp"
#include "tcfbm/tfbm.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace tcfbm;

namespace {

TfbmModel model(SubordinatorSpec spec, double hurst, double sigma2 = 1.0) {
  return TfbmModel{std::move(spec), hurst, sigma2};
}

}  // namespace

TEST_CASE("fbm_cov implements the fractional Brownian kernel") {
  REQUIRE_THAT(fbm_cov(0.5, 1.0, 3.0, 2.0), WithinRel(2.0, 1e-15));
  REQUIRE_THAT(fbm_cov(0.3, 2.0, 1.0, 1.0), WithinRel(2.0, 1e-15));
  REQUIRE_THAT(fbm_cov(0.7, 1.0, 2.0, 1.0), WithinRel(1.3195079107728943, 1e-14));
  for (double h : {0.3, 0.5, 0.8}) {
    REQUIRE_THAT(fbm_cov(h, 1.5, 2.0, 0.7), WithinRel(fbm_cov(h, 1.5, 0.7, 2.0), 1e-15));
    REQUIRE_THAT(fbm_cov(h, 1.5, 2.0, 2.0), WithinRel(1.5 * std::pow(2.0, 2.0 * h), 1e-14));
  }
  REQUIRE_THROWS_AS(fbm_cov(1.0, 1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("fgn_autocov matches the second-difference formula") {
  REQUIRE(fgn_autocov(0.8, 2.5, 0) == 2.5);
  REQUIRE(fgn_autocov(0.5, 1.0, 1) == 0.0);
  REQUIRE(fgn_autocov(0.5, 1.0, 7) == 0.0);
  for (long j = 1; j <= 20; ++j) {
    REQUIRE(fgn_autocov(0.8, 1.0, j) > 0.0);
    REQUIRE(fgn_autocov(0.3, 1.0, j) < 0.0);
  }
  const double H = 0.8;
  const long j = 10000;
  const double ratio = fgn_autocov(H, 1.0, j) /
                       (H * (2.0 * H - 1.0) * std::pow(static_cast<double>(j), 2.0 * H - 2.0));
  REQUIRE(ratio > 0.99);
  REQUIRE(ratio < 1.01);
  REQUIRE_THROWS_AS(fgn_autocov(0.8, 1.0, -1), std::domain_error);
}

TEST_CASE("var_Z matches frozen references per family") {
  REQUIRE_THAT(var_Z(model(Stable{0.8}, 0.6), 2.0), WithinRel(2.1787685290927909, 1e-13));
  REQUIRE_THAT(var_Z(model(Stable{0.7}, 0.7), 1.0), WithinRel(1.2525550188056894, 1e-13));
  REQUIRE_THAT(var_Z(model(TemperedStable{0.5, 1.0}, 0.7), 1.0),
               WithinRel(3.7930559443058182, 1e-8));
  REQUIRE_THAT(var_Z(model(StableMixture{0.3, 0.7, 0.5, 0.5}, 0.7), 1.0),
               WithinRel(1.3959033522300135, 1e-11));
  REQUIRE_THAT(var_Z(model(DeterministicDrift{1.0}, 0.65, 1.7), 2.0),
               WithinRel(1.7 * std::pow(2.0, 1.3), 1e-13));
  REQUIRE(var_Z(model(Stable{0.6}, 0.7), 0.0) == 0.0);
}

TEST_CASE("cov_Z matches the frozen stable reference and the drift reduction") {
  REQUIRE_THAT(cov_Z(model(Stable{0.6}, 0.7), 2.0, 1.0), WithinRel(1.5156431307928079, 1e-10));
  const auto drift = model(DeterministicDrift{1.0}, 0.7, 1.3);
  for (double t : {0.2, 0.7, 1.0, 2.5, 6.0}) {
    for (double s : {0.2, 0.7, 1.0, 2.5, 6.0}) {
      REQUIRE_THAT(cov_Z(drift, t, s), WithinAbs(fbm_cov(0.7, 1.3, t, s), 1e-10));
    }
  }
  REQUIRE(cov_Z(model(Stable{0.6}, 0.7), 2.0, 0.0) == 0.0);
}

TEST_CASE("cov_Z quadrature equals the stable closed form across a grid") {
  const double grid[] = {0.5, 1.0, 2.0, 4.0, 8.0};
  for (double alpha : {0.4, 0.7}) {
    for (double H : {0.3, 0.6, 0.8}) {
      const auto m = model(Stable{alpha}, H, 1.4);
      for (double t : grid) {
        for (double s : grid) {
          if (t == s) continue;
          const double closed = stable_cov_closed_form(alpha, H, 1.4, t, s);
          REQUIRE_THAT(cov_Z_quadrature(m, t, s), WithinRel(closed, 1e-8));
        }
      }
    }
  }
}

TEST_CASE("cov_Z quadrature hits var_Z on the diagonal") {
  const SubordinatorSpec specs[] = {Stable{0.6}, StableMixture{0.3, 0.7, 0.5, 0.5},
                                    TemperedStable{0.5, 1.0}, DeterministicDrift{2.0}};
  for (const auto& spec : specs) {
    for (double H : {0.3, 0.7}) {
      const auto m = model(spec, H);
      for (double t : {0.1, 1.0, 10.0}) {
        REQUIRE_THAT(cov_Z_quadrature(m, t, t), WithinRel(var_Z(m, t), 1e-9));
      }
    }
  }
}

TEST_CASE("stable_cov_closed_form special values") {
  REQUIRE_THAT(stable_cov_closed_form(0.5, 0.5, 1.0, 4.0, 1.0),
               WithinRel(1.1283791670955126, 1e-13));
  REQUIRE_THAT(stable_cov_closed_form(0.6, 0.7, 2.0, 3.0, 3.0),
               WithinRel(var_Z(model(Stable{0.6}, 0.7, 2.0), 3.0), 1e-12));
  REQUIRE_THAT(stable_cov_closed_form(0.6, 0.7, 1.0, 1.0, 2.0),
               WithinRel(stable_cov_closed_form(0.6, 0.7, 1.0, 2.0, 1.0), 1e-15));
  REQUIRE(stable_cov_closed_form(0.6, 0.7, 1.0, 2.0, 0.0) == 0.0);
}

TEST_CASE("cov_Z satisfies Cauchy-Schwarz and positive semidefiniteness") {
  const SubordinatorSpec specs[] = {Stable{0.6}, StableMixture{0.3, 0.7, 0.5, 0.5},
                                    TemperedStable{0.5, 1.0}, DeterministicDrift{1.0}};
  const std::vector<double> ts = {0.5, 1.0, 2.0, 4.0, 8.0};
  for (const auto& spec : specs) {
    const auto m = model(spec, 0.7);
    std::vector<double> cov(ts.size() * ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = i; j < ts.size(); ++j) {
        const double c = cov_Z(m, ts[i], ts[j]);
        cov[i * ts.size() + j] = c;
        cov[j * ts.size() + i] = c;
        REQUIRE(c * c <= var_Z(m, ts[i]) * var_Z(m, ts[j]) * (1.0 + 1e-9));
      }
    }
    const auto eig = test_stats::symmetric_eigenvalues(cov, ts.size());
    REQUIRE(eig.front() >= -1e-8);
  }
}

TEST_CASE("corr_Z reductions and bounds") {
  REQUIRE(corr_Z(model(Stable{0.6}, 0.7), 1.5, 1.5) == 1.0);
  REQUIRE_THAT(corr_Z(model(Stable{0.5}, 0.5), 4.0, 1.0),
               WithinRel(0.70710678118654752, 1e-12));
  // H = 1/2 shortcut agrees with the general covariance route.
  const SubordinatorSpec specs[] = {Stable{0.6}, StableMixture{0.3, 0.7, 0.5, 0.5},
                                    TemperedStable{0.5, 1.0}};
  for (const auto& spec : specs) {
    const auto m = model(spec, 0.5, 1.7);
    const double direct =
        cov_Z_quadrature(m, 2.0, 0.7) / std::sqrt(var_Z(m, 2.0) * var_Z(m, 0.7));
    REQUIRE_THAT(corr_Z(m, 2.0, 0.7), WithinRel(direct, 1e-9));
    for (double t : {0.5, 1.0, 3.0}) {
      const double c = corr_Z(model(spec, 0.8), t, 1.0);
      REQUIRE(std::fabs(c) <= 1.0 + 1e-9);
    }
  }
  REQUIRE_THROWS_AS(corr_Z(model(Stable{0.6}, 0.7), 0.0, 1.0), std::domain_error);
}

TEST_CASE("abs_increment_moment_Z carries the Gaussian prefactor") {
  const auto drift = model(DeterministicDrift{1.0}, 0.7, 1.6);
  REQUIRE_THAT(abs_increment_moment_Z(drift, 2.0, 3.0, 1.0),
               WithinRel(1.6 * std::pow(2.0, 1.4), 1e-12));
  // Fourth moment of a Gaussian increment: 3 sigma^4 |t-s|^{4H}.
  REQUIRE_THAT(abs_increment_moment_Z(drift, 4.0, 3.0, 1.0),
               WithinRel(3.0 * 1.6 * 1.6 * std::pow(2.0, 2.8), 1e-12));
  REQUIRE(abs_increment_moment_Z(drift, 2.0, 1.0, 1.0) == 0.0);
  const auto st = model(Stable{0.6}, 0.7);
  REQUIRE_THAT(abs_increment_moment_Z(st, 2.0, 2.0, 1.0),
               WithinRel(increment_moment_Y(Stable{0.6}, 1.4, 2.0, 1.0), 1e-12));
  REQUIRE_THROWS_AS(abs_increment_moment_Z(st, 0.0, 2.0, 1.0), std::domain_error);
}

TEST_CASE("increment_cov_Z vanishes at H=1/2 and matches the drift oracle") {
  const SubordinatorSpec specs[] = {Stable{0.6}, StableMixture{0.3, 0.7, 0.5, 0.5},
                                    TemperedStable{0.5, 1.0}};
  for (const auto& spec : specs) REQUIRE(increment_cov_Z(model(spec, 0.5), 1.0, 2.0) == 0.0);
  // Drift case from fBm increments:
  //   Cov = (sigma2/2)((t+v)^{2H} + (v-t)^{2H} - 2 v^{2H}).
  const double H = 0.7;
  const double oracle = 0.5 * (std::pow(3.0, 1.4) + 1.0 - 2.0 * std::pow(2.0, 1.4));
  REQUIRE_THAT(increment_cov_Z(model(DeterministicDrift{1.0}, H), 1.0, 2.0),
               WithinRel(oracle, 1e-10));
  REQUIRE_THAT(oracle, WithinRel(0.18875253932725099, 1e-13));
  REQUIRE_THROWS_AS(increment_cov_Z(model(Stable{0.6}, 0.7), 2.0, 1.0), std::domain_error);
}

TEST_CASE("increment_cov_Z matches frozen stable values and the decay slope") {
  const auto m = model(Stable{0.6}, 0.8);
  const double lo = increment_cov_Z(m, 1.0, 100.0);
  const double hi = increment_cov_Z(m, 1.0, 10000.0);
  REQUIRE_THAT(lo, WithinRel(0.016965597990900123, 1e-8));
  REQUIRE_THAT(hi, WithinRel(0.00089106414768428433, 1e-8));
  const double slope = (std::log(hi) - std::log(lo)) / (std::log(10000.0) - std::log(100.0));
  REQUIRE_THAT(slope, WithinAbs(0.6 * (2.0 * 0.8 - 1.0) - 1.0, 0.02));
}

TEST_CASE("negative dependence: increment covariance is negative for H < 1/2") {
  REQUIRE(increment_cov_Z(model(Stable{0.6}, 0.3), 1.0, 3.0) < 0.0);
  REQUIRE(increment_cov_Z(model(Stable{0.6}, 0.8), 1.0, 3.0) > 0.0);
}

TEST_CASE("stable_asymptotics reproduces the correlation mixture of powers") {
  const auto report = stable_asymptotics(0.6, 0.8, 1.0, 0.0, 1.0, 0.0);
  REQUIRE(report.regime == "t->infinity");
  REQUIRE_THAT(report.leading_value, WithinRel(0.61839987800182387, 1e-12));
  REQUIRE_THAT(report.leading_exponent, WithinRel(-0.6 * 0.2, 1e-15));
  REQUIRE_THAT(report.second_exponent, WithinRel(-0.6 * 0.8, 1e-15));
  REQUIRE_THAT(report.second_value, WithinRel(0.5, 1e-15));
  // Self-consistency at t = 1e4 (frozen corr value, ratio inside [0.98, 1.02]).
  const double corr = corr_Z(model(Stable{0.6}, 0.8), 1e4, 1.0);
  REQUIRE_THAT(corr, WithinRel(0.21078000283157945, 1e-8));
  const double ratio = corr / evaluate_asymptote(report, 1e4);
  REQUIRE(ratio > 0.98);
  REQUIRE(ratio < 1.02);
  // Long-range dependence: corr * t^{a(1-H)} approaches the leading constant.
  REQUIRE_THAT(corr * std::pow(1e4, 0.6 * 0.2), WithinRel(report.leading_value, 0.05));
}

TEST_CASE("stable_asymptotics collapses to a single power at H = 1/2") {
  const auto report = stable_asymptotics(0.7, 0.5, 1.0, 0.0, 2.0, 0.0);
  REQUIRE_THAT(report.leading_value, WithinRel(std::pow(2.0, 0.35), 1e-14));
  REQUIRE_THAT(report.leading_exponent, WithinRel(-0.35, 1e-15));
  REQUIRE_FALSE(std::isfinite(report.second_exponent));
  const double corr = corr_Z(model(Stable{0.7}, 0.5), 50.0, 2.0);
  REQUIRE_THAT(corr, WithinRel(evaluate_asymptote(report, 50.0), 1e-10));
}

TEST_CASE("stable_asymptotics increment regime matches the measured decay") {
  const auto report = stable_asymptotics(0.6, 0.8, 1.0, 1.0, 0.0, 0.0,
                                         AsymptoticRegime::large_v_increments);
  REQUIRE_THAT(report.leading_exponent, WithinRel(-0.64, 1e-14));
  const double v = 1e4;
  const double ratio =
      increment_cov_Z(model(Stable{0.6}, 0.8), 1.0, v) / evaluate_asymptote(report, v);
  REQUIRE(ratio > 0.98);
  REQUIRE(ratio < 1.05);
  // H = 1/2 coefficient vanishes with the increment covariance itself.
  const auto flat = stable_asymptotics(0.6, 0.5, 1.0, 1.0, 0.0, 0.0,
                                       AsymptoticRegime::large_v_increments);
  REQUIRE(flat.leading_value == 0.0);
}

TEST_CASE("mixture_asymptotics variance regimes") {
  const StableMixture mix{0.3, 0.7, 0.5, 0.5};
  const double H = 0.6;
  const auto large = mixture_asymptotics(mix, H, 1.0, 1e6);
  const auto small = mixture_asymptotics(mix, H, 1.0, 1e-6, AsymptoticRegime::small_t);
  const auto m = model(mix, H);
  const double ratio_large = var_Z(m, 1e6) / evaluate_asymptote(large, 1e6);
  const double ratio_small = var_Z(m, 1e-6) / evaluate_asymptote(small, 1e-6);
  REQUIRE_THAT(ratio_large, WithinRel(0.99586168061915653, 1e-7));
  REQUIRE_THAT(ratio_small, WithinRel(0.99601612368805674, 1e-7));
  REQUIRE(ratio_large > 0.95);
  REQUIRE(ratio_large < 1.05);
  // The small-t ratio tightens as t decreases (correction is O(t^{a2-a1})).
  const double ratio_tiny = var_Z(m, 1e-9) / evaluate_asymptote(small, 1e-9);
  REQUIRE(std::fabs(ratio_tiny - 1.0) < std::fabs(ratio_small - 1.0));
  const auto degenerate = mixture_asymptotics(StableMixture{0.3, 0.7, 1e-12, 1.0 - 1e-12}, H,
                                              1.0, 1e6);
  REQUIRE(degenerate.description.find("degenerate") != std::string::npos);
}

TEST_CASE("tempered_asymptotics regimes") {
  const TemperedStable sp{0.5, 1.0};
  const auto karamata = tempered_asymptotics(sp, 0.7, 1.0, 1e3, 0.0);
  const double ratio =
      var_Z(model(sp, 0.7), 1e3) / evaluate_asymptote(karamata, 1e3);
  REQUIRE_THAT(ratio, WithinRel(1.0004899607885226, 1e-7));
  REQUIRE(ratio > 0.95);
  REQUIRE(ratio < 1.05);

  const auto small = tempered_asymptotics(sp, 0.7, 1.0, 0.0, 0.0, AsymptoticRegime::small_t);
  const double u = moment_U(SubordinatorSpec{sp}, 1.0, 1e-4);
  REQUIRE_THAT(u / evaluate_asymptote(small, 1e-4), WithinAbs(1.0, 0.02));

  const auto corr_small_s =
      tempered_asymptotics(sp, 0.5, 1.0, 1.0, 0.0, AsymptoticRegime::small_s);
  const double corr = corr_Z(model(sp, 0.5), 1.0, 1e-4);
  const double r = corr / evaluate_asymptote(corr_small_s, 1e-4);
  REQUIRE(r > 0.99);
  REQUIRE(r < 1.01);
  REQUIRE_THROWS_AS(tempered_asymptotics(sp, 0.7, 1.0, 1.0, 0.0, AsymptoticRegime::small_s),
                    std::invalid_argument);
}

TEST_CASE("model validation") {
  REQUIRE_NOTHROW(validate_model(model(Stable{0.6}, 0.7)));
  REQUIRE_THROWS_AS(validate_model(model(Stable{0.6}, 1.0)), std::invalid_argument);
  REQUIRE_THROWS_AS(validate_model(TfbmModel{Stable{0.6}, 0.7, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(validate_model(model(Stable{1.6}, 0.7)), std::invalid_argument);
}
