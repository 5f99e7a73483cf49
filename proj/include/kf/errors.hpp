#pragma once

#include <stdexcept>
#include <string>

namespace kf {

/// Base class for all errors raised by the library.  Input validation and
/// contract violations throw subclasses of this; numerical results are never
/// silently clamped to hide a failed precondition.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A vector that must be nonzero has norm below the zero threshold.
class ZeroVector : public Error {
 public:
  explicit ZeroVector(const std::string& what) : Error(what) {}
};

/// A vector that must be unit length is neither unit nor allowed to be scaled.
class NotNormalized : public Error {
 public:
  explicit NotNormalized(const std::string& what) : Error(what) {}
};

/// Operands live in spaces of different dimensions.
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

/// Two aligned sequences have different lengths.
class LengthMismatch : public Error {
 public:
  explicit LengthMismatch(const std::string& what) : Error(what) {}
};

/// A projection-valued law fails the uniform lower bound (the mean projection
/// has a near-zero eigenvalue, so no geometric decay rate is certified).
class NotUniform : public Error {
 public:
  explicit NotUniform(const std::string& what) : Error(what) {}
};

/// The weight normalization sandwich 1/||A^{-1}||^2 < sum_k ||A* phi_k||^2
/// fails, so the sampling law cannot be certified.
class Hp0Violated : public Error {
 public:
  explicit Hp0Violated(const std::string& what) : Error(what) {}
};

/// A matrix that must be invertible is singular to working precision.
class Singular : public Error {
 public:
  explicit Singular(const std::string& what) : Error(what) {}
};

/// A matrix that must be row-stochastic is not.
class NotStochastic : public Error {
 public:
  explicit NotStochastic(const std::string& what) : Error(what) {}
};

/// A Monte Carlo quadrature cannot reach the requested accuracy within the
/// configured sample budget.
class QuadratureBudgetExceeded : public Error {
 public:
  explicit QuadratureBudgetExceeded(const std::string& what) : Error(what) {}
};

/// A system descriptor (built-in name or JSON document) is malformed or
/// violates a structural precondition, e.g. a non-expansive scaling matrix.
class InvalidDescriptor : public Error {
 public:
  explicit InvalidDescriptor(const std::string& what) : Error(what) {}
};

/// A file could not be read, parsed, or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace kf
