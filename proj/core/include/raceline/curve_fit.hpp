#pragma once

#include <span>

#include "raceline/free_parameters.hpp"

namespace raceline {

struct CenterlineFit {
  FreeParameters params;
  /// Max distance between each input point and the fitted closed curve at
  /// that point's (corrected) parameter, meters.
  double residual = 0.0;
};

/// Least-squares fit of a closed cubic curve (unit weights, uniform interior
/// knots, last control point index n) to an ordered closed loop of points.
/// A closing duplicate of the first point is accepted and ignored.
///
/// Throws std::invalid_argument if fewer than n+1 points are given or the
/// points are (nearly) collinear or coincident.
CenterlineFit fit_centerline(std::span<const Vec2> points, int n,
                             int correction_rounds = 12);

}  // namespace raceline
