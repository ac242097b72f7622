#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "raceline/constraint_map.hpp"
#include "raceline/nurbs.hpp"

namespace raceline {

struct DynamicLimits {
  double v_max = 6.0;           ///< m/s
  double a_par_nominal = 3.0;   ///< longitudinal, m/s^2
  double a_perp_nominal = 4.0;  ///< lateral, m/s^2

  void validate() const;
};

/// Velocity along the path and its acceleration split into tangential and
/// normal components.
struct Kinematics {
  double v = 0.0;
  double a_par = 0.0;
  double a_perp = 0.0;  ///< signed, positive turning left
};

/// v = |c'|/T, a_par = (c'.c'')/(T^2 |c'|), a_perp = (c' x c'')/(T^2 |c'|).
/// Throws SingularityError on a degenerate tangent, DomainError if T <= 0.
Kinematics kinematics_at(const NurbsCurve& curve, double u, double lap_time);

inline constexpr int kDefaultLapTimeSamples = 2048;

/// Smallest T on a uniform u grid for which no velocity or acceleration
/// limit is exceeded.
double min_lap_time_const(const NurbsCurve& curve, const DynamicLimits& limits,
                          int samples = kDefaultLapTimeSamples);

/// As min_lap_time_const with acceleration limits M(q(u)) * nominal taken
/// from the map at each sample. Throws OutOfExtentError carrying u if the
/// curve leaves the map.
double min_lap_time_spatial(const NurbsCurve& curve, const DynamicLimits& limits,
                            const ConstraintMap& map,
                            int samples = kDefaultLapTimeSamples);

struct TrajectorySample {
  double u = 0.0;
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  ///< tangent direction, radians
  double v = 0.0;
  double a_par = 0.0;
  double a_perp = 0.0;
  double kappa = 0.0;  ///< signed curvature, 1/m
};

/// Dense time-parameterized samples of a closed curve at u_j = j/N.
struct TimedTrajectory {
  double lap_time = 0.0;
  std::vector<TrajectorySample> samples;
  std::shared_ptr<const NurbsCurve> curve;  ///< may be null for synthetic data

  int size() const { return static_cast<int>(samples.size()); }
};

inline constexpr int kMinTrajectorySamples = 512;

/// Samples curve at N uniform parameters in [0,1). Throws DomainError if
/// T <= 0 or N < 2.
TimedTrajectory sample_trajectory(std::shared_ptr<const NurbsCurve> curve,
                                  double lap_time, int samples);

/// Delimited export: "# T <lap_time> N <count>" then header
/// "u,x,y,v,a_par,a_perp,kappa" and one row per sample.
void write_trajectory_csv(std::ostream& os, const TimedTrajectory& trajectory);
void save_trajectory_csv(const std::string& path, const TimedTrajectory& trajectory);

}  // namespace raceline
