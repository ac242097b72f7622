#include "raceline/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include "raceline/errors.hpp"

namespace raceline {
namespace {

struct Saturation {
  double lateral_cap = 0.0;  // m/s^2
  double max_steer = 0.0;
  double wheelbase = 0.0;
  double accel = 0.0;        // already clipped
  double steer_rate = 0.0;
};

double yaw_rate(const VehicleState& s, const Saturation& sat, bool* saturated) {
  const double nominal = s.speed * std::tan(s.steer) / sat.wheelbase;
  const double lateral = std::abs(s.speed * nominal);
  if (lateral > sat.lateral_cap && s.speed > 0.0) {
    if (saturated) *saturated = true;
    return std::copysign(sat.lateral_cap / s.speed, nominal);
  }
  return nominal;
}

VehicleState saturated_dynamics(const VehicleState& s, const Saturation& sat) {
  VehicleState d;
  const double speed = std::max(s.speed, 0.0);
  d.x = speed * std::cos(s.heading);
  d.y = speed * std::sin(s.heading);
  d.heading = yaw_rate(s, sat, nullptr);
  d.steer = sat.steer_rate;
  if ((s.steer >= sat.max_steer && d.steer > 0.0) ||
      (s.steer <= -sat.max_steer && d.steer < 0.0)) {
    d.steer = 0.0;
  }
  d.speed = sat.accel;
  return d;
}

VehicleState axpy(const VehicleState& s, double h, const VehicleState& d) {
  return {s.x + h * d.x, s.y + h * d.y, s.heading + h * d.heading,
          s.steer + h * d.steer, s.speed + h * d.speed};
}

}  // namespace

void VehicleParams::validate() const {
  if (!(wheelbase > 0.0) || !(max_steer > 0.0) || !(max_steer < 1.5) ||
      !(max_steer_rate > 0.0) || !(max_accel > 0.0) || !(a_par_physical > 0.0) ||
      !(a_perp_physical > 0.0)) {
    throw ConfigError("vehicle parameters must be positive (max_steer < 1.5 rad)");
  }
}

bool FrictionPatch::contains(const Vec2& p) const {
  if (shape == Shape::kCircle) return (p - center).squaredNorm() <= radius * radius;
  // Even-odd ray casting.
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y()) &&
        p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

double FrictionField::scale_at(const Vec2& p) const {
  double s = 1.0;
  for (const FrictionPatch& patch : patches) {
    if (patch.contains(p)) s = std::min(s, patch.scale);
  }
  return global_scale * s;
}

void FrictionField::validate() const {
  if (!(global_scale > 0.0)) throw ConfigError("friction: global scale must be positive");
  for (const FrictionPatch& patch : patches) {
    if (!(patch.scale > 0.0) || patch.scale > 1.0) {
      throw ConfigError("friction: patch scale must be in (0, 1]");
    }
    if (patch.shape == FrictionPatch::Shape::kCircle && !(patch.radius > 0.0)) {
      throw ConfigError("friction: circle patch radius must be positive");
    }
    if (patch.shape == FrictionPatch::Shape::kPolygon && patch.polygon.size() < 3) {
      throw ConfigError("friction: polygon patch needs >= 3 vertices");
    }
  }
}

VehicleState dynamics(const VehicleState& state, const ControlInput& input,
                      double wheelbase) {
  VehicleState d;
  d.x = state.speed * std::cos(state.heading);
  d.y = state.speed * std::sin(state.heading);
  d.heading = state.speed * std::tan(state.steer) / wheelbase;
  d.steer = input.steer_rate;
  d.speed = input.accel;
  return d;
}

PlantStep step(const VehicleState& state, const ControlInput& input, double dt,
               const FrictionField& friction, const VehicleParams& params) {
  const double mu = friction.scale_at(state.position());
  PlantStep out;

  Saturation sat;
  sat.wheelbase = params.wheelbase;
  sat.max_steer = params.max_steer;
  sat.lateral_cap = mu * params.a_perp_physical;
  sat.steer_rate = std::clamp(input.steer_rate, -params.max_steer_rate, params.max_steer_rate);
  const double commanded = std::clamp(input.accel, -params.max_accel, params.max_accel);
  const double traction = mu * params.a_par_physical;
  sat.accel = std::clamp(commanded, -traction, traction);
  if (sat.accel != commanded) out.slip = true;
  // No reversing: braking at standstill does nothing.
  if (state.speed <= 0.0 && sat.accel < 0.0) sat.accel = 0.0;

  bool lateral_saturated = false;
  out.yaw_rate = yaw_rate(state, sat, &lateral_saturated);
  out.slip = out.slip || lateral_saturated;
  out.accel = sat.accel;

  const VehicleState k1 = saturated_dynamics(state, sat);
  const VehicleState k2 = saturated_dynamics(axpy(state, 0.5 * dt, k1), sat);
  const VehicleState k3 = saturated_dynamics(axpy(state, 0.5 * dt, k2), sat);
  const VehicleState k4 = saturated_dynamics(axpy(state, dt, k3), sat);
  VehicleState next = state;
  next.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  next.y += dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  next.heading += dt / 6.0 * (k1.heading + 2.0 * k2.heading + 2.0 * k3.heading + k4.heading);
  next.steer += dt / 6.0 * (k1.steer + 2.0 * k2.steer + 2.0 * k3.steer + k4.steer);
  next.speed += dt / 6.0 * (k1.speed + 2.0 * k2.speed + 2.0 * k3.speed + k4.speed);
  next.steer = std::clamp(next.steer, -params.max_steer, params.max_steer);
  next.speed = std::max(next.speed, 0.0);
  out.state = next;
  return out;
}

}  // namespace raceline
