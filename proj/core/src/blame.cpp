#include "raceline/blame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "raceline/errors.hpp"

namespace raceline {

SignZones sign_zones(std::span<const double> a_par, double deadband, Wrap wrap) {
  if (a_par.size() < 2) throw std::invalid_argument("sign_zones needs >= 2 samples");
  SignZones zones;
  zones.signs.reserve(a_par.size());
  for (double a : a_par) {
    zones.signs.push_back(std::abs(a) <= deadband ? 0 : (a > 0.0 ? 1 : -1));
  }
  const int n = static_cast<int>(a_par.size());
  const int last = wrap == Wrap::kClosed ? n : n - 1;
  for (int i = 0; i < last; ++i) {
    if (zones.signs[(i + 1) % n] != zones.signs[i]) zones.crossings.push_back(i);
  }
  return zones;
}

ClosestPoint closest_point(const TimedTrajectory& trajectory, const Vec2& position) {
  const int n = trajectory.size();
  if (n < 2) throw std::invalid_argument("closest_point needs a sampled trajectory");
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double d2 = (trajectory.samples[i].position - position).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }

  ClosestPoint out{best, trajectory.samples[best].u, std::sqrt(best_d2)};
  const double du = 1.0 / n;
  // Segment toward the next sample (t in [0,1]) and from the previous one.
  for (int dir : {1, -1}) {
    const int other = (best + dir + n) % n;
    const Vec2& a = trajectory.samples[best].position;
    const Vec2 seg = trajectory.samples[other].position - a;
    const double len2 = seg.squaredNorm();
    if (len2 <= 0.0) continue;
    const double t = std::clamp((position - a).dot(seg) / len2, 0.0, 1.0);
    const double d = (a + t * seg - position).norm();
    if (d < out.distance) {
      out.distance = d;
      double u = trajectory.samples[best].u + dir * t * du;
      u -= std::floor(u);
      out.u = u;
    }
  }
  return out;
}

int transition_index(std::span<const int> crossings, int i_min) {
  if (crossings.empty()) throw NoTransitionError("no acceleration sign transition on the lap");
  const auto it = std::lower_bound(crossings.begin(), crossings.end(), i_min);
  if (it == crossings.begin()) return crossings.back();
  return *(it - 1);
}

BlameRegion blame_region(const TimedTrajectory& trajectory, int i_transition,
                         int i_min, double error) {
  const int n = trajectory.size();
  if (i_transition < 0 || i_transition >= n || i_min < 0 || i_min >= n) {
    throw std::out_of_range("blame region index outside the trajectory");
  }
  BlameRegion region;
  region.start = i_transition;
  region.end = i_min;
  region.error = error;
  const int count = circular_span(i_transition, i_min, n);
  region.indices.reserve(count);
  region.positions.reserve(count);
  for (int k = 0; k < count; ++k) {
    const int idx = (i_transition + k) % n;
    region.indices.push_back(idx);
    region.positions.push_back(trajectory.samples[idx].position);
  }
  return region;
}

}  // namespace raceline
