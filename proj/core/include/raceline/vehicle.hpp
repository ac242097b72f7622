#pragma once

#include <vector>

#include "raceline/nurbs.hpp"

namespace raceline {

/// Kinematic single-track state.
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double steer = 0.0;  ///< front wheel angle, radians
  double speed = 0.0;  ///< m/s, >= 0

  Vec2 position() const { return {x, y}; }
};

struct ControlInput {
  double accel = 0.0;       ///< m/s^2
  double steer_rate = 0.0;  ///< rad/s
};

struct VehicleParams {
  double wheelbase = 0.33;
  double max_steer = 0.4;
  double max_steer_rate = 3.2;
  double max_accel = 6.0;  ///< command bound |a|
  /// Traction ceilings on a mu-scale 1 surface.
  double a_par_physical = 3.3;
  double a_perp_physical = 4.4;

  void validate() const;
};

/// Region with reduced grip.
struct FrictionPatch {
  enum class Shape { kCircle, kPolygon };
  Shape shape = Shape::kCircle;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  std::vector<Vec2> polygon;
  double scale = 1.0;  ///< in (0, 1]

  bool contains(const Vec2& p) const;
};

/// mu-scale field: global scale times the smallest scale of any patch
/// containing the position.
struct FrictionField {
  double global_scale = 1.0;
  std::vector<FrictionPatch> patches;

  double scale_at(const Vec2& p) const;
  void validate() const;
};

/// Continuous-time kinematic single-track model (no saturation). The
/// returned struct holds time derivatives.
VehicleState dynamics(const VehicleState& state, const ControlInput& input,
                      double wheelbase);

struct PlantStep {
  VehicleState state;
  bool slip = false;       ///< traction limit engaged during the step
  double yaw_rate = 0.0;   ///< realized yaw rate at the start of the step
  double accel = 0.0;      ///< realized longitudinal acceleration
};

/// One RK4 step of the plant with traction saturation: lateral demand
/// v^2 tan(delta)/L above mu*a_perp_physical is cut to the saturating yaw
/// rate (understeer), |a| is clipped to mu*a_par_physical. Commands are first
/// clipped to the actuator bounds; steer stays within +-max_steer and speed
/// does not go negative.
PlantStep step(const VehicleState& state, const ControlInput& input, double dt,
               const FrictionField& friction, const VehicleParams& params);

}  // namespace raceline
