#pragma once

#include <span>
#include <vector>

#include "raceline/nurbs.hpp"

namespace raceline {

/// The optimizable subset of a closed cubic NURBS curve.
///
/// For a curve with control points p_0..p_n, the free set is p_0..p_{n-3},
/// their weights, and the n-p interior knots. The last three control points
/// and weights are implied by the C2 lap-closure conditions.
struct FreeParameters {
  std::vector<Vec2> control_points;    ///< p_0 .. p_{n-3}
  std::vector<double> weights;         ///< w_0 .. w_{n-3}, all > 0
  std::vector<double> interior_knots;  ///< strictly increasing in (0,1)

  /// Index of the last control point of the closed curve.
  int n() const { return static_cast<int>(control_points.size()) + 2; }

  /// Number of reals in the flat encoding: 2(n-2) + (n-2) + (n-p).
  int dimension() const;

  /// Throws std::invalid_argument on mismatched counts, nonpositive weights
  /// or non-monotone knots.
  void validate() const;
};

/// Smallest admissible first/last interior knot span before the closure
/// system is declared ill-conditioned.
inline constexpr double kMinClosureSpan = 1e-5;

/// Completes the free parameters into a C2-closed curve:
/// p_n = p_0, weights mirrored (w_n = w_0, w_{n-1} = w_1, w_{n-2} = w_2),
/// and p_{n-1}, p_{n-2} solved so that the rational first and second
/// derivatives at u = 1 equal those at u = 0.
/// Throws ConditioningError when an end knot span is below kMinClosureSpan.
NurbsCurve apply_closure(const FreeParameters& free);

/// Flat unconstrained encoding used by the optimizer:
/// [x_0, y_0, ..., x_{n-3}, y_{n-3}, log w_0, ..., log w_{n-3}, z_0, ..., z_{n-p-1}]
/// where the knot logits z_j = log(d_j / d_last) of the knot increments d.
std::vector<double> encode(const FreeParameters& free);

/// Inverse of encode for a curve whose last control point index is n.
FreeParameters decode(std::span<const double> theta, int n);

/// Free-parameter dimension for last control point index n.
int free_dimension(int n);

}  // namespace raceline
