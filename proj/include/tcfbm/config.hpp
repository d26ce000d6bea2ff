#pragma once

#include <stdexcept>

namespace tcfbm {

// Tolerances and budgets shared by the series evaluators.
struct EvalConfig {
  double rel_tol = 1e-12;      // target relative error
  int max_terms = 2000;        // series term budget
  double series_radius = 5.0;  // |z| threshold between series and asymptotic branches
};

enum class InversionMethod {
  fixed_talbot,
  gaver_stehfest,
};

// Node budget and method for numerical Laplace transform inversion.
struct InversionConfig {
  int node_count = 32;
  InversionMethod method = InversionMethod::fixed_talbot;
};

inline void validate(const EvalConfig& cfg) {
  if (!(cfg.rel_tol > 0.0) || !(cfg.rel_tol < 1.0))
    throw std::invalid_argument("EvalConfig: rel_tol must be in (0, 1)");
  if (cfg.max_terms < 8)
    throw std::invalid_argument("EvalConfig: max_terms must be >= 8");
  if (!(cfg.series_radius > 0.0))
    throw std::invalid_argument("EvalConfig: series_radius must be > 0");
}

inline void validate(const InversionConfig& cfg) {
  if (cfg.node_count < 8)
    throw std::invalid_argument("InversionConfig: node_count must be >= 8");
  if (cfg.method == InversionMethod::gaver_stehfest && (cfg.node_count % 2) != 0)
    throw std::invalid_argument("InversionConfig: gaver_stehfest needs an even node_count");
}

}  // namespace tcfbm
