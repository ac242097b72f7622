#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace raceline {

using Vec2 = Eigen::Vector2d;

/// Nonzero B-spline basis values on one knot span.
struct BasisValues {
  int span = 0;                ///< index i with u in [u_i, u_{i+1})
  std::vector<double> values;  ///< N_{span-p,p}(u) ... N_{span,p}(u)
};

/// Cox-de Boor evaluation of the p+1 nonzero basis functions at u.
/// Throws DomainError if u is outside [0,1].
BasisValues basis_functions(double u, std::span<const double> knots, int degree);

/// Closed-capable rational cubic spline with a clamped knot vector.
///
/// Immutable after construction; all members are const and safe to call
/// concurrently.
class NurbsCurve {
 public:
  static constexpr int kDegree = 3;

  /// Validates the invariants (positive weights, clamped nondecreasing knots,
  /// m = n + p + 1) and throws std::invalid_argument otherwise.
  NurbsCurve(std::vector<Vec2> control_points, std::vector<double> weights,
             std::vector<double> knots);

  int degree() const { return kDegree; }
  /// Index of the last control point.
  int n() const { return static_cast<int>(control_points_.size()) - 1; }
  const std::vector<Vec2>& control_points() const { return control_points_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& knots() const { return knots_; }

  Vec2 evaluate(double u) const;

  /// k-th parametric derivative, k >= 1. One-sided (from the right) at
  /// interior knots, from the left at u = 1.
  Vec2 derivative(double u, int k) const;

  /// Position, first and second derivative in one pass.
  std::array<Vec2, 3> derivatives2(double u) const;

  /// |c' x c''| / |c'|^3. Throws SingularityError when |c'| <= kMinSpeed.
  double curvature(double u) const;
  double signed_curvature(double u) const;

  static constexpr double kMinSpeed = 1e-9;

 private:
  // Derivatives 0..order of the rational curve.
  void rational_derivatives(double u, int order, Vec2* out) const;

  std::vector<Vec2> control_points_;
  std::vector<double> weights_;
  std::vector<double> knots_;
};

/// Uniform clamped knot vector for n+1 control points of degree p.
std::vector<double> uniform_clamped_knots(int n, int degree = NurbsCurve::kDegree);

/// Greville abscissae xi_i = (u_{i+1} + ... + u_{i+p}) / p.
std::vector<double> greville_abscissae(std::span<const double> knots, int degree);

}  // namespace raceline
