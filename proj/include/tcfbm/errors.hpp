#pragma once

#include <stdexcept>
#include <string>

namespace tcfbm {

// Iterative evaluation exhausted its term or iteration budget before
// reaching the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Two successive node counts of a numerical Laplace inversion disagreed by
// more than 100x the method's expected accuracy.
class InversionError : public std::runtime_error {
 public:
  explicit InversionError(const std::string& what) : std::runtime_error(what) {}
};

// Adaptive quadrature failed to stabilise within its refinement budget.
class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

// Monte Carlo sampling could not produce a valid draw or path (rejection
// stall, horizon never crossed, too many failed replicates).
class SamplerError : public std::runtime_error {
 public:
  explicit SamplerError(const std::string& what) : std::runtime_error(what) {}
};

// A dense Gaussian factorization failed even after regularisation.
class FactorizationError : public std::runtime_error {
 public:
  explicit FactorizationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tcfbm
