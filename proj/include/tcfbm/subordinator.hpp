#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tcfbm/numeric_detail.hpp"

namespace tcfbm {

// phi(lambda) = lambda^alpha, 0 < alpha < 1.
struct Stable {
  double alpha;
};

// phi(lambda) = (a + lambda)^alpha - a^alpha, 0 < alpha < 1, a > 0.
struct TemperedStable {
  double alpha;
  double a;
};

// phi(lambda) = c1 lambda^alpha1 + c2 lambda^alpha2,
// 0 < alpha1 < alpha2 < 1, c1 > 0, c2 > 0, c1 + c2 = 1.
struct StableMixture {
  double alpha1;
  double alpha2;
  double c1;
  double c2;
};

// phi(lambda) = mu lambda, mu > 0; Y(t) = t/mu deterministically.
struct DeterministicDrift {
  double mu;
};

// User-supplied Bernstein function. The evaluator must accept complex
// arguments (analytic continuation off the negative real axis) so that
// contour-based Laplace inversion can drive all moment computations.
struct CustomBernstein {
  std::function<std::complex<double>(std::complex<double>)> phi;
};

using SubordinatorSpec =
    std::variant<Stable, TemperedStable, StableMixture, DeterministicDrift, CustomBernstein>;

namespace detail {

inline std::complex<double> phi_eval(const SubordinatorSpec& spec, std::complex<double> lambda) {
  return std::visit(
      [&](const auto& f) -> std::complex<double> {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) {
          if (lambda == 0.0) return 0.0;
          return std::pow(lambda, f.alpha);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          if (lambda == 0.0) return 0.0;
          return std::pow(f.a + lambda, f.alpha) - std::pow(f.a, f.alpha);
        } else if constexpr (std::is_same_v<T, StableMixture>) {
          if (lambda == 0.0) return 0.0;
          return f.c1 * std::pow(lambda, f.alpha1) + f.c2 * std::pow(lambda, f.alpha2);
        } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
          return f.mu * lambda;
        } else {
          return f.phi(lambda);
        }
      },
      spec);
}

}  // namespace detail

// phi(lambda) on the closed half line; phi(0) = 0 exactly for the
// parametric families.
inline double laplace_exponent(const SubordinatorSpec& spec, double lambda) {
  if (!(lambda >= 0.0)) throw std::domain_error("laplace_exponent: lambda must be >= 0");
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) {
          return std::pow(lambda, f.alpha);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          // a^alpha * ((1 + lambda/a)^alpha - 1), stable under lambda << a.
          return std::pow(f.a, f.alpha) * std::expm1(f.alpha * std::log1p(lambda / f.a));
        } else if constexpr (std::is_same_v<T, StableMixture>) {
          return f.c1 * std::pow(lambda, f.alpha1) + f.c2 * std::pow(lambda, f.alpha2);
        } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
          return f.mu * lambda;
        } else {
          return f.phi(std::complex<double>(lambda, 0.0)).real();
        }
      },
      spec);
}

// phi(lambda) continued off the real axis, for inversion contours.
inline std::complex<double> laplace_exponent(const SubordinatorSpec& spec,
                                             std::complex<double> lambda) {
  return detail::phi_eval(spec, lambda);
}

inline std::string family_name(const SubordinatorSpec& spec) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) return "stable";
        if constexpr (std::is_same_v<T, TemperedStable>) return "tempered";
        if constexpr (std::is_same_v<T, StableMixture>) return "mixture";
        if constexpr (std::is_same_v<T, DeterministicDrift>) return "drift";
        return "custom";
      },
      spec);
}

// Power governing the t -> 0 behaviour of the renewal measure: U'(y) is
// integrably singular like y^{e-1} with e = small_time_exponent. Quadrature
// substitutions use it to absorb the endpoint singularity.
inline double small_time_exponent(const SubordinatorSpec& spec) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) return f.alpha;
        if constexpr (std::is_same_v<T, TemperedStable>) return f.alpha;
        if constexpr (std::is_same_v<T, StableMixture>) return f.alpha2;
        return 1.0;
      },
      spec);
}

namespace detail {

inline void check_range_open01(std::vector<std::string>& out, const char* name, double v) {
  if (!(v > 0.0 && v < 1.0))
    out.push_back(std::string(name) + " must lie in (0,1), got " + float_to_string(v));
}

inline void check_positive(std::vector<std::string>& out, const char* name, double v) {
  if (!(v > 0.0)) out.push_back(std::string(name) + " must be > 0, got " + float_to_string(v));
}

// Grid sanity for an opaque Bernstein evaluator: necessary conditions only,
// reported as warnings.
inline std::vector<std::string> bernstein_grid_warnings(const CustomBernstein& f) {
  std::vector<std::string> warnings;
  const double zero = std::abs(f.phi(std::complex<double>(0.0, 0.0)));
  if (!(zero <= 1e-10)) warnings.push_back("custom phi(0) != 0 on grid check");
  constexpr int n = 41;
  std::vector<double> lam(n), val(n);
  bool finite = true;
  for (int i = 0; i < n; ++i) {
    lam[i] = std::pow(10.0, -6.0 + 12.0 * i / (n - 1));
    const auto p = f.phi(std::complex<double>(lam[i], 0.0));
    val[i] = p.real();
    if (!std::isfinite(val[i]) || std::abs(p.imag()) > 1e-10 * std::max(1.0, std::abs(val[i])))
      finite = false;
  }
  if (!finite) {
    warnings.push_back("custom phi not finite/real on the check grid");
    return warnings;
  }
  bool monotone = true;
  bool concave = true;
  for (int i = 0; i + 1 < n; ++i) {
    const double scale = std::max({1.0, std::fabs(val[i]), std::fabs(val[i + 1])});
    if (val[i + 1] < val[i] - 1e-9 * scale) monotone = false;
    if (i + 2 < n) {
      const double s01 = (val[i + 1] - val[i]) / (lam[i + 1] - lam[i]);
      const double s12 = (val[i + 2] - val[i + 1]) / (lam[i + 2] - lam[i + 1]);
      if (s12 > s01 + 1e-9 * std::max(1.0, std::fabs(s01))) concave = false;
    }
  }
  if (!monotone) warnings.push_back("custom phi not nondecreasing on the check grid");
  if (!concave) warnings.push_back("custom phi not concave on the check grid");
  return warnings;
}

}  // namespace detail

// Accepts iff every parameter constraint holds; the error message names each
// violated constraint. Grid checks on a custom evaluator are necessary but
// not sufficient, so they warn instead of rejecting.
inline SubordinatorSpec validate_spec(const SubordinatorSpec& spec,
                                      std::ostream& warn_stream = std::cerr) {
  std::vector<std::string> violations;
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) {
          detail::check_range_open01(violations, "alpha", f.alpha);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          detail::check_range_open01(violations, "alpha", f.alpha);
          detail::check_positive(violations, "a", f.a);
        } else if constexpr (std::is_same_v<T, StableMixture>) {
          detail::check_range_open01(violations, "alpha1", f.alpha1);
          detail::check_range_open01(violations, "alpha2", f.alpha2);
          if (!(f.alpha1 < f.alpha2)) violations.push_back("alpha1 must be < alpha2");
          detail::check_positive(violations, "c1", f.c1);
          detail::check_positive(violations, "c2", f.c2);
          if (!(std::fabs(f.c1 + f.c2 - 1.0) <= 1e-12))
            violations.push_back("c1 + c2 must equal 1, got " +
                                 detail::float_to_string(f.c1 + f.c2));
        } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
          detail::check_positive(violations, "mu", f.mu);
        } else {
          if (!f.phi) {
            violations.push_back("custom phi evaluator is empty");
          } else {
            for (const auto& w : detail::bernstein_grid_warnings(f))
              warn_stream << "warning: " << w << '\n';
          }
        }
      },
      spec);
  if (!violations.empty()) {
    std::string msg = "invalid subordinator spec: " + violations[0];
    for (std::size_t i = 1; i < violations.size(); ++i) msg += "; " + violations[i];
    throw std::invalid_argument(msg);
  }
  return spec;
}

// Flat key=value serialization, e.g. "family=stable alpha=0.7".
inline std::string spec_to_kv(const SubordinatorSpec& spec) {
  using detail::float_to_string;
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) {
          return "family=stable alpha=" + float_to_string(f.alpha);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          return "family=tempered alpha=" + float_to_string(f.alpha) +
                 " a=" + float_to_string(f.a);
        } else if constexpr (std::is_same_v<T, StableMixture>) {
          return "family=mixture alpha1=" + float_to_string(f.alpha1) +
                 " alpha2=" + float_to_string(f.alpha2) + " c1=" + float_to_string(f.c1) +
                 " c2=" + float_to_string(f.c2);
        } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
          return "family=drift mu=" + float_to_string(f.mu);
        } else {
          return "family=custom";
        }
      },
      spec);
}

namespace detail {

inline double kv_number(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("missing spec key: " + key);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("spec key " + key + " is not a number: " + it->second);
  }
  if (used != it->second.size())
    throw std::invalid_argument("spec key " + key + " is not a number: " + it->second);
  return v;
}

}  // namespace detail

// Parses the flat key=value form. Rejects unknown families, unknown keys,
// and any parameter set that fails validate_spec.
inline SubordinatorSpec spec_from_kv(const std::map<std::string, std::string>& kv) {
  const auto fam = kv.find("family");
  if (fam == kv.end()) throw std::invalid_argument("missing spec key: family");
  SubordinatorSpec spec;
  std::vector<std::string> allowed{"family"};
  if (fam->second == "stable") {
    spec = Stable{detail::kv_number(kv, "alpha")};
    allowed.push_back("alpha");
  } else if (fam->second == "tempered") {
    spec = TemperedStable{detail::kv_number(kv, "alpha"), detail::kv_number(kv, "a")};
    allowed.insert(allowed.end(), {"alpha", "a"});
  } else if (fam->second == "mixture") {
    spec = StableMixture{detail::kv_number(kv, "alpha1"), detail::kv_number(kv, "alpha2"),
                         detail::kv_number(kv, "c1"), detail::kv_number(kv, "c2")};
    allowed.insert(allowed.end(), {"alpha1", "alpha2", "c1", "c2"});
  } else if (fam->second == "drift") {
    spec = DeterministicDrift{detail::kv_number(kv, "mu")};
    allowed.push_back("mu");
  } else {
    throw std::invalid_argument("unknown family: " + fam->second);
  }
  for (const auto& [key, value] : kv) {
    (void)value;
    bool known = false;
    for (const auto& a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument("unknown spec key for this family: " + key);
  }
  return validate_spec(spec);
}

}  // namespace tcfbm
