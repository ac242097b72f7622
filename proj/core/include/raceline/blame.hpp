#pragma once

#include <span>
#include <vector>

#include "raceline/time_parameterization.hpp"

namespace raceline {

/// Per-sample sign of a_par and the indices i where S[i+1] != S[i].
struct SignZones {
  std::vector<int> signs;      ///< -1, 0, +1
  std::vector<int> crossings;  ///< strictly increasing
};

enum class Wrap {
  kClosed,  ///< the pair (last, first) is also checked (laps)
  kOpen,    ///< plain sequence
};

/// S[i] = 0 when |a_par[i]| <= deadband, otherwise sign(a_par[i]).
/// Requires at least two samples.
SignZones sign_zones(std::span<const double> a_par, double deadband,
                     Wrap wrap = Wrap::kClosed);

struct ClosestPoint {
  int index = 0;        ///< nearest sample
  double u = 0.0;       ///< refined curve parameter
  double distance = 0.0;  ///< e_hat, meters
};

/// Nearest sample followed by projection onto the two adjacent sample
/// segments (circular).
ClosestPoint closest_point(const TimedTrajectory& trajectory, const Vec2& position);

/// Most recent crossing strictly before i_min in circular order: the largest
/// z < i_min, or the last crossing when none precedes i_min.
/// Throws NoTransitionError when crossings is empty.
int transition_index(std::span<const int> crossings, int i_min);

struct BlameRegion {
  int start = 0;  ///< i_transition
  int end = 0;    ///< i_min
  std::vector<int> indices;  ///< circular [start, end]
  std::vector<Vec2> positions;
  double error = 0.0;
};

BlameRegion blame_region(const TimedTrajectory& trajectory, int i_transition,
                         int i_min, double error);

/// Circular interval length of [start, end] over n samples.
inline int circular_span(int start, int end, int n) {
  return ((end - start) % n + n) % n + 1;
}

}  // namespace raceline
