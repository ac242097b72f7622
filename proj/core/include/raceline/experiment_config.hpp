#pragma once

#include <cstdint>
#include <string>

#include "raceline/constraint_map.hpp"
#include "raceline/mpc.hpp"
#include "raceline/objective.hpp"
#include "raceline/time_parameterization.hpp"
#include "raceline/vehicle.hpp"

namespace raceline {

struct SimulationConfig {
  double plant_dt = 0.001;
  double measurement_noise = 0.005;  ///< position noise std, meters
  double abort_error = 2.0;          ///< e_hat that aborts a lap, meters
  double timeout_factor = 3.0;       ///< lap timeout = factor * T + 2 s
  /// Reference time is re-anchored to the vehicle when it lags or leads the
  /// plan by more than this many seconds.
  double resync_threshold = 0.15;
  int trajectory_samples = 1024;

  void validate() const;
};

struct OptimizerConfig {
  int control_points = 16;  ///< last control point index n
  long initial_evaluations = 6000;  ///< budget before the first lap
  long iterations_per_lap = 1500;   ///< budget between laps
  double sigma0 = 0.1;
  int population = 0;
  int threads = 1;
  /// Position scale of the search space; 0 selects the mean half-width.
  double position_scale = 0.0;

  void validate() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string track_file;     ///< absolute or relative to the config file
  std::string builtin_track;  ///< used when track_file is empty
  FrictionField friction;
  DynamicLimits limits;
  VehicleParams vehicle;
  /// Plant traction ceiling as a multiple of the planner nominals.
  double headroom = 1.1;
  FeedbackConfig feedback;
  bool feedback_enabled = true;
  int feedback_from_lap = 1;  ///< first lap (1-based) whose log is fed back
  MapParams map;
  double map_resolution = 0.25;
  double map_margin = 1.0;
  MpcConfig mpc;
  ObjectiveConfig objective;
  OptimizerConfig optimizer;
  SimulationConfig simulation;
  int laps = 8;
  std::uint64_t seed = 1;
  std::string out_dir = "runs/experiment";

  /// Throws ConfigError.
  void validate() const;
};

/// Parses a JSON document. Unknown keys are rejected. Relative track paths
/// are resolved against base_dir. Derived values (physical ceilings from
/// headroom, kappa_max from steering, MPC bounds) are filled in unless set
/// explicitly. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = "");
ExperimentConfig load_config(const std::string& path);

/// Fully resolved config as JSON; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);

}  // namespace raceline
