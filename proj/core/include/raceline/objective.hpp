#pragma once

#include "raceline/constraint_map.hpp"
#include "raceline/free_parameters.hpp"
#include "raceline/time_parameterization.hpp"
#include "raceline/track.hpp"
#include "raceline/vehicle.hpp"

namespace raceline {

struct ObjectiveConfig {
  double lambda_dist = 50.0;  ///< s/m^2
  double lambda_curv = 10.0;
  double kappa_max = 1.2829;  ///< 1/m
  int penalty_samples = 512;
  int lap_time_samples = kDefaultLapTimeSamples;
  /// Returned for curves that cannot be evaluated.
  double degenerate_cost = 1e4;

  void validate() const;
};

/// kappa_max from the minimum turning radius L / tan(max_steer).
double max_curvature(const VehicleParams& vehicle);

struct ObjectiveTerms {
  double lap_time = 0.0;
  double phi_distance = 0.0;
  double phi_curvature = 0.0;
  double cost = 0.0;
  bool degenerate = false;
};

/// Mean of max(0, boundary excess)^2 over samples at u_j = j/N.
double distance_penalty(const NurbsCurve& curve, const TrackModel& track, int samples);

/// Rectangle-rule integral over u in [0,1) of max(0, |kappa| - kappa_max)^2.
double curvature_penalty(const NurbsCurve& curve, double kappa_max, int samples);

ObjectiveTerms evaluate_curve(const NurbsCurve& curve, const TrackModel& track,
                              const DynamicLimits& limits, const ConstraintMap& map,
                              const ObjectiveConfig& cfg);

/// Closes and scores the candidate; never throws on degenerate geometry.
ObjectiveTerms evaluate_objective(const FreeParameters& theta, const TrackModel& track,
                                  const DynamicLimits& limits, const ConstraintMap& map,
                                  const ObjectiveConfig& cfg);

/// Binds the scene so candidates can be scored by value.
class RacelineObjective {
 public:
  RacelineObjective(const TrackModel& track, DynamicLimits limits,
                    const ConstraintMap& map, ObjectiveConfig cfg)
      : track_(&track), limits_(limits), map_(&map), cfg_(cfg) {}

  ObjectiveTerms operator()(const FreeParameters& theta) const {
    return evaluate_objective(theta, *track_, limits_, *map_, cfg_);
  }

 private:
  const TrackModel* track_;
  DynamicLimits limits_;
  const ConstraintMap* map_;
  ObjectiveConfig cfg_;
};

}  // namespace raceline
