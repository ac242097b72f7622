#pragma once

#include <stdexcept>
#include <string>

namespace raceline {

/// Argument outside the mathematical domain of an operation (u outside
/// [0,1], derivative order < 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Degenerate tangent: the curve has (numerically) zero parametric speed.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double u)
      : std::runtime_error(what + " (u=" + std::to_string(u) + ")"), u_(u) {}
  double u() const noexcept { return u_; }

 private:
  double u_;
};

/// Closure system cannot be solved reliably (end knot spans collapsed).
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A position fell outside the extent of a grid or field.
class OutOfExtentError : public std::out_of_range {
 public:
  OutOfExtentError(const std::string& what, double u)
      : std::out_of_range(what), u_(u) {}
  /// Curve parameter at which the lookup happened, or NaN if not applicable.
  double u() const noexcept { return u_; }

 private:
  double u_;
};

/// Blame attribution found no acceleration sign transition on the lap.
class NoTransitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment or component configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace raceline
