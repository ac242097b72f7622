#include "raceline/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace raceline {

void ObjectiveConfig::validate() const {
  if (!(lambda_dist >= 0.0) || !(lambda_curv >= 0.0)) {
    throw std::invalid_argument("objective: penalty weights must be >= 0");
  }
  if (!(kappa_max > 0.0)) throw std::invalid_argument("objective: kappa_max must be > 0");
  if (penalty_samples < 2 || lap_time_samples < 2) {
    throw std::invalid_argument("objective: sample counts must be >= 2");
  }
  if (!std::isfinite(degenerate_cost)) {
    throw std::invalid_argument("objective: degenerate_cost must be finite");
  }
}

double max_curvature(const VehicleParams& vehicle) {
  return std::tan(vehicle.max_steer) / vehicle.wheelbase;
}

double distance_penalty(const NurbsCurve& curve, const TrackModel& track, int samples) {
  double sum = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double excess = track.boundary_excess(curve.evaluate(static_cast<double>(j) / samples));
    sum += excess * excess;
  }
  return sum / samples;
}

double curvature_penalty(const NurbsCurve& curve, double kappa_max, int samples) {
  double sum = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double over =
        std::max(0.0, curve.curvature(static_cast<double>(j) / samples) - kappa_max);
    sum += over * over;
  }
  return sum / samples;
}

ObjectiveTerms evaluate_curve(const NurbsCurve& curve, const TrackModel& track,
                              const DynamicLimits& limits, const ConstraintMap& map,
                              const ObjectiveConfig& cfg) {
  ObjectiveTerms t;
  t.lap_time = min_lap_time_spatial(curve, limits, map, cfg.lap_time_samples);
  t.phi_distance = distance_penalty(curve, track, cfg.penalty_samples);
  t.phi_curvature = curvature_penalty(curve, cfg.kappa_max, cfg.penalty_samples);
  t.cost = t.lap_time + cfg.lambda_dist * t.phi_distance + cfg.lambda_curv * t.phi_curvature;
  if (!std::isfinite(t.cost)) {
    t.cost = cfg.degenerate_cost;
    t.degenerate = true;
  }
  return t;
}

ObjectiveTerms evaluate_objective(const FreeParameters& theta, const TrackModel& track,
                                  const DynamicLimits& limits, const ConstraintMap& map,
                                  const ObjectiveConfig& cfg) {
  try {
    return evaluate_curve(apply_closure(theta), track, limits, map, cfg);
  } catch (const std::exception&) {
    ObjectiveTerms t;
    t.cost = cfg.degenerate_cost;
    t.degenerate = true;
    return t;
  }
}

}  // namespace raceline
