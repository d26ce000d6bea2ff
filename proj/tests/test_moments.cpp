#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "tcfbm/moments.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace tcfbm;

namespace {

const SubordinatorSpec kStableHalf = Stable{0.5};
const SubordinatorSpec kMix = StableMixture{0.3, 0.7, 0.5, 0.5};
const SubordinatorSpec kTempered = TemperedStable{0.5, 1.0};

SubordinatorSpec custom_root() {
  return CustomBernstein{[](std::complex<double> z) { return std::sqrt(z); }};
}

}  // namespace

TEST_CASE("laplace_U_moment implements Gamma(1+gamma)/(lambda phi^gamma)") {
  REQUIRE_THAT(laplace_U_moment(DeterministicDrift{2.0}, 1.0, 1.0), WithinRel(0.5, 1e-15));
  REQUIRE_THAT(laplace_U_moment(kStableHalf, 2.0, 4.0), WithinRel(0.125, 1e-14));
  const double alpha = 0.6, H = 0.7;
  for (double lam : {0.5, 1.0, 3.0, 10.0}) {
    REQUIRE_THAT(laplace_U_moment(Stable{alpha}, 2.0 * H, lam),
                 WithinRel(gamma_fn(2.0 * H + 1.0) / std::pow(lam, 2.0 * H * alpha + 1.0), 1e-13));
  }
  REQUIRE_THROWS_AS(laplace_U_moment(kStableHalf, 1.0, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(laplace_U_moment(kStableHalf, -1.0, 1.0), std::domain_error);
}

TEST_CASE("inverting the moment transform recovers the mixture closed form") {
  const auto transform = [&](std::complex<double> lam) {
    return detail::laplace_U_moment_c(kMix, 1.0, lam);
  };
  for (double t : {0.5, 2.0}) {
    REQUIRE_THAT(invert_laplace_at(transform, t, InversionConfig{}),
                 WithinRel(moment_U(kMix, 1.0, t), 1e-8));
  }
}

TEST_CASE("moment_U closed forms match frozen references") {
  REQUIRE_THAT(moment_U(kStableHalf, 1.0, 1.0), WithinRel(1.1283791670955126, 1e-13));
  REQUIRE_THAT(moment_U(DeterministicDrift{2.0}, 2.0, 3.0), WithinRel(2.25, 1e-15));
  REQUIRE_THAT(moment_U(Stable{0.7}, 1.4, 2.0), WithinRel(2.4706214474469309, 1e-13));
  REQUIRE_THAT(moment_U(kMix, 1.0, 1.0), WithinRel(1.1498232198857308, 1e-11));
  REQUIRE_THAT(moment_U(kMix, 1.2, 2.0), WithinRel(1.8941303623144711, 1e-11));
  REQUIRE_THAT(moment_U(kMix, 1.2, 1e6), WithinRel(409.31600104955481, 1e-8));
  REQUIRE_THAT(moment_U(kTempered, 1.0, 1.0), WithinRel(2.4716049381348697, 1e-11));
}

TEST_CASE("moment_U numerical-inversion paths match frozen references") {
  REQUIRE_THAT(moment_U(kTempered, 1.4, 2.0), WithinRel(8.5851252384041812, 1e-8));
  REQUIRE_THAT(moment_U(kTempered, 1.4, 1000.0), WithinRel(41846.074998838852, 1e-8));
  REQUIRE_THAT(moment_U(kTempered, 0.6, 0.1), WithinRel(0.59649248725522396, 1e-8));
  REQUIRE_THAT(moment_U(custom_root(), 1.0, 1.0), WithinRel(1.1283791670955126, 1e-8));
}

TEST_CASE("mixture closed form agrees with direct inversion off the test grid") {
  const SubordinatorSpec mix46 = StableMixture{0.3, 0.7, 0.4, 0.6};
  const auto transform = [&](std::complex<double> lam) {
    return detail::laplace_U_moment_c(mix46, 1.4, lam);
  };
  REQUIRE_THAT(moment_U(mix46, 1.4, 2.0),
               WithinRel(invert_laplace_at(transform, 2.0, InversionConfig{}), 1e-8));
}

TEST_CASE("tempered renewal function reduces to the stable one as a -> 0") {
  REQUIRE_THAT(moment_U(TemperedStable{0.5, 1e-8}, 1.0, 1.0),
               WithinRel(moment_U(kStableHalf, 1.0, 1.0), 1e-3));
}

TEST_CASE("moment_U boundary and domain behaviour") {
  for (const SubordinatorSpec& spec :
       {kStableHalf, kMix, kTempered, SubordinatorSpec{DeterministicDrift{2.0}}}) {
    REQUIRE(moment_U(spec, 1.3, 0.0) == 0.0);
  }
  REQUIRE_THROWS_AS(moment_U(kStableHalf, 0.0, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(moment_U(kStableHalf, 1.0, -1.0), std::domain_error);
}

TEST_CASE("moment_U is nondecreasing in t") {
  for (const SubordinatorSpec& spec : {kStableHalf, kMix, kTempered}) {
    double prev = 0.0;
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
      const double v = moment_U(spec, 1.7, t);
      REQUIRE(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("renewal_density matches frozen references") {
  REQUIRE_THAT(renewal_density(DeterministicDrift{4.0}, 7.3), WithinRel(0.25, 1e-15));
  REQUIRE_THAT(renewal_density(kStableHalf, 1.0), WithinRel(0.56418958354775629, 1e-13));
  REQUIRE_THAT(renewal_density(kMix, 1.0), WithinRel(0.57813055862587198, 1e-11));
  REQUIRE_THAT(renewal_density(kTempered, 1.0), WithinRel(2.0502545416600122, 1e-11));
  REQUIRE_THAT(renewal_density(custom_root(), 1.0), WithinRel(0.56418958354775629, 1e-8));
  REQUIRE_THROWS_AS(renewal_density(kStableHalf, 0.0), std::domain_error);
}

TEST_CASE("renewal_density is the derivative of the renewal function") {
  const double h = 1e-5;
  for (const SubordinatorSpec& spec : {kMix, kTempered}) {
    const double fd = (moment_U(spec, 1.0, 2.0 + h) - moment_U(spec, 1.0, 2.0 - h)) / (2.0 * h);
    REQUIRE_THAT(renewal_density(spec, 2.0), WithinRel(fd, 1e-6));
  }
}

TEST_CASE("moment recursion: U^k(t) = k int_0^t U^(k-1)(t-y) dU(y)") {
  const SubordinatorSpec specs[] = {Stable{0.6}, kMix, SubordinatorSpec{DeterministicDrift{2.0}},
                                    kTempered};
  for (const auto& spec : specs) {
    for (double kappa : {1.5, 2.0, 2.7}) {
      for (double t : {0.5, 1.0, 5.0}) {
        const double integral = kappa * integrate_against_renewal(spec, t, [&](double, double tmy) {
          return detail::moment_u_any(spec, kappa - 1.0, tmy, EvalConfig{}, InversionConfig{});
        });
        REQUIRE_THAT(integral, WithinRel(moment_U(spec, kappa, t), 1e-8));
      }
    }
  }
}

TEST_CASE("numerically transforming moment_U reproduces laplace_U_moment") {
  const double kappa = 1.3;
  for (const SubordinatorSpec& spec : {SubordinatorSpec{Stable{0.6}},
                                       SubordinatorSpec{DeterministicDrift{1.5}}}) {
    for (double lam : {1.0, 2.0, 5.0}) {
      const double T = 50.0 / lam;
      const double numeric = detail::tanh_sinh_01([&](double u, double) {
        const double t = T * u;
        return T * std::exp(-lam * t) * moment_U(spec, kappa, t);
      });
      REQUIRE_THAT(numeric, WithinRel(laplace_U_moment(spec, kappa, lam), 1e-5));
    }
  }
}

TEST_CASE("increment_moment_Y matches frozen and analytic references") {
  REQUIRE(increment_moment_Y(kMix, 1.7, 2.0, 2.0) == 0.0);
  REQUIRE_THAT(increment_moment_Y(DeterministicDrift{1.0}, 2.0, 3.0, 1.0),
               WithinRel(4.0, 1e-12));
  REQUIRE_THAT(increment_moment_Y(Stable{0.7}, 2.0, 2.0, 1.0),
               WithinRel(0.91331718392684403, 1e-9));
  // Incomplete-beta closed form for the stable family.
  const double alpha = 0.6, kappa = 2.0, t = 2.0, s = 1.0;
  const double closed =
      gamma_fn(kappa + 1.0) * std::pow(t, alpha * kappa) *
      (1.0 / gamma_fn(alpha * kappa + 1.0) -
       incomplete_beta(alpha, alpha * (kappa - 1.0) + 1.0, s / t) /
           (gamma_fn(alpha) * gamma_fn(alpha * (kappa - 1.0) + 1.0)));
  REQUIRE_THAT(increment_moment_Y(Stable{alpha}, kappa, t, s), WithinRel(closed, 1e-9));
}

TEST_CASE("increment_moment_Y structural identities") {
  const SubordinatorSpec specs[] = {Stable{0.6}, kMix, kTempered};
  for (const auto& spec : specs) {
    REQUIRE_THAT(increment_moment_Y(spec, 1.6, 2.0, 0.5),
                 WithinRel(increment_moment_Y(spec, 1.6, 0.5, 2.0), 1e-14));
    REQUIRE_THAT(increment_moment_Y(spec, 2.3, 1.5, 0.0),
                 WithinRel(moment_U(spec, 2.3, 1.5), 1e-14));
    // kappa = 1 telescopes to U(t) - U(s).
    REQUIRE_THAT(increment_moment_Y(spec, 1.0, 2.0, 0.5),
                 WithinRel(moment_U(spec, 1.0, 2.0) - moment_U(spec, 1.0, 0.5), 1e-9));
  }
}

TEST_CASE("increment_moment_Y grows with the time gap and stays nonnegative") {
  for (const SubordinatorSpec& spec : {SubordinatorSpec{Stable{0.6}}, kMix}) {
    double prev = 0.0;
    for (double t : {1.2, 1.5, 2.0, 3.0, 5.0}) {
      const double v = increment_moment_Y(spec, 1.4, t, 1.0);
      REQUIRE(v >= 0.0);
      REQUIRE(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("custom evaluator increments agree with the equivalent stable family") {
  REQUIRE_THAT(increment_moment_Y(custom_root(), 2.0, 2.0, 1.0),
               WithinRel(increment_moment_Y(kStableHalf, 2.0, 2.0, 1.0), 1e-6));
}

TEST_CASE("cov_Y matches frozen references and closed forms") {
  REQUIRE(cov_Y(DeterministicDrift{1.0}, 2.0, 1.0) == 0.0);
  REQUIRE_THAT(cov_Y(kStableHalf, 1.0, 1.0), WithinRel(0.72676045526483731, 1e-10));
  REQUIRE_THAT(cov_Y(kStableHalf, 2.0, 1.0), WithinRel(0.83598714005336920, 1e-9));
  // Incomplete-beta closed form, stable family, t >= s.
  const double alpha = 0.6, t = 2.0, s = 1.0;
  const double closed = std::pow(s, 2.0 * alpha) / gamma_fn(2.0 * alpha + 1.0) +
                        std::pow(t, 2.0 * alpha) / (gamma_fn(alpha) * gamma_fn(alpha + 1.0)) *
                            incomplete_beta(alpha, alpha + 1.0, s / t) -
                        std::pow(t * s, alpha) / std::pow(gamma_fn(alpha + 1.0), 2.0);
  REQUIRE_THAT(cov_Y(Stable{alpha}, t, s), WithinRel(closed, 1e-10));
}

TEST_CASE("cov_Y is symmetric and reduces to the variance on the diagonal") {
  for (const SubordinatorSpec& spec : {SubordinatorSpec{Stable{0.6}}, kMix, kTempered}) {
    REQUIRE_THAT(cov_Y(spec, 2.0, 0.7), WithinRel(cov_Y(spec, 0.7, 2.0), 1e-14));
    const double var = moment_U(spec, 2.0, 1.5) - std::pow(moment_U(spec, 1.0, 1.5), 2.0);
    REQUIRE_THAT(cov_Y(spec, 1.5, 1.5), WithinRel(var, 1e-8));
    REQUIRE(cov_Y(spec, 1.5, 1.5) >= 0.0);
  }
  REQUIRE(cov_Y(kMix, 3.0, 0.0) == 0.0);
}
