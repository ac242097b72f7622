#pragma once

#include <span>
#include <vector>

#include "raceline/time_parameterization.hpp"
#include "raceline/vehicle.hpp"

namespace raceline {

struct MpcConfig {
  int horizon = 20;
  double dt = 0.02;
  double w_position = 10.0;
  double w_heading = 1.0;
  double w_speed = 1.0;
  double w_accel = 0.1;
  double w_steer_rate = 0.1;
  double terminal_scale = 5.0;
  /// Soft penalty on |steer| beyond the steering limit.
  double w_steer_limit = 100.0;
  int max_iterations = 8;

  // Model and actuator bounds; normally copied from VehicleParams.
  double wheelbase = 0.33;
  double max_steer = 0.4;
  double max_steer_rate = 3.2;
  double max_accel = 6.0;

  void validate() const;
};

/// MpcConfig with the vehicle's geometry and actuator bounds.
MpcConfig with_vehicle(MpcConfig cfg, const VehicleParams& vehicle);

struct ReferenceState {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
  double speed = 0.0;
  double accel = 0.0;      ///< along-path acceleration
  double curvature = 0.0;  ///< signed
  double u = 0.0;
};

/// References at t_now + k*dt for k = 0..count-1, time wrapped modulo the
/// lap time (u = t/T). Uses the source curve when present, otherwise linear
/// interpolation of the samples.
std::vector<ReferenceState> reference_window(const TimedTrajectory& trajectory,
                                             double t_now, int count, double dt);

struct MpcSolution {
  ControlInput command;
  std::vector<ControlInput> inputs;     ///< full optimized sequence
  std::vector<VehicleState> predicted;  ///< x_0 .. x_H
  double cost = 0.0;
  double feedforward_cost = 0.0;
  std::vector<double> cost_history;  ///< one entry per accepted iterate
  int iterations = 0;
  bool converged = false;  ///< false: iteration cap hit, best iterate returned
};

/// Trajectory-tracking receding-horizon controller on the kinematic
/// single-track model. Gauss-Newton on the condensed (shooting) problem with
/// a projected-Newton box QP for the input bounds and a backtracking line
/// search, so the cost never increases between accepted iterates.
///
/// Holds a warm-start buffer; one instance per simulation.
class TrackingMpc {
 public:
  explicit TrackingMpc(MpcConfig cfg);

  /// window must hold horizon+1 references starting at the current time.
  MpcSolution solve(const VehicleState& state, std::span<const ReferenceState> window);

  void reset() { warm_start_.clear(); }
  const MpcConfig& config() const { return cfg_; }

 private:
  MpcConfig cfg_;
  std::vector<ControlInput> warm_start_;
};

/// Discrete prediction model (RK4 over dt, no traction limits).
VehicleState predict_step(const VehicleState& state, const ControlInput& input,
                          double dt, double wheelbase);

}  // namespace raceline
