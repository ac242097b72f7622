#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "raceline/blame.hpp"
#include "raceline/constraint_map.hpp"
#include "raceline/experiment_config.hpp"
#include "raceline/free_parameters.hpp"
#include "raceline/mpc.hpp"
#include "raceline/time_parameterization.hpp"
#include "raceline/track.hpp"
#include "raceline/vehicle.hpp"

namespace raceline {

/// One controller step of a simulated lap.
struct LapLogRow {
  int step = 0;
  double t = 0.0;  ///< plant clock since lap start
  VehicleState state;
  ControlInput command;
  bool slip = false;  ///< traction limit hit during the step
  double mu = 1.0;    ///< friction scale at the measured position
  double u_min = 0.0;
  int i_min = 0;
  double e_hat = 0.0;
};

struct LapLog {
  std::vector<LapLogRow> rows;
  double duration = 0.0;  ///< plant time at the lap boundary (or abort)
  bool aborted = false;
  std::string abort_reason;
};

/// Simulates one lap starting on the first trajectory sample. The plant runs
/// at sim.plant_dt under zero-order hold of the controller command; the
/// controller runs every mpc.dt on a noisy position measurement. The lap ends
/// when the closest-point parameter wraps from above 0.9 to below 0.1 and
/// stays below 0.5 for 5 more controller steps.
LapLog run_lap(const TimedTrajectory& trajectory, TrackingMpc& controller,
               const FrictionField& friction, const VehicleParams& vehicle,
               const SimulationConfig& sim, const BoundingBox& extent,
               std::mt19937_64& rng);

struct BlameEvent {
  int lap = 0;
  int step = 0;
  int i_min = 0;
  int i_transition = 0;
  double e_hat = 0.0;
  double e = 0.0;         ///< modulated error applied (0 if not applied)
  bool reported = false;  ///< e_hat above the reporting floor
  bool applied = false;   ///< winner of its zone
};

struct FeedbackResult {
  std::vector<BlameEvent> events;
  std::vector<BlameRegion> regions;  ///< one per applied zone
  int cells_updated = 0;
  int reported_count() const;
};

/// Attributes the lap's errors to blame regions and updates the map: one
/// application per zone, using that zone's largest e_hat. Aborted laps get
/// 2 w_minus max(e_hat, e_th) on the zone of the last step.
FeedbackResult feedback_pass(const LapLog& log, const TimedTrajectory& trajectory,
                             ConstraintMap& map, const FeedbackConfig& cfg,
                             double a_par_nominal, int lap);

struct LapResult {
  int lap = 0;
  double planned_lap_time = 0.0;
  double executed_duration = 0.0;
  double max_error = 0.0;
  double mean_error = 0.0;
  int event_count = 0;
  int cells_updated = 0;
  int slip_steps = 0;
  bool aborted = false;
  bool feedback_applied = false;
  double best_cost = 0.0;
  long evaluations = 0;  ///< optimizer evaluations before this lap
  double map_mean = 0.0;
  double map_min = 0.0;
  double map_max = 0.0;
  std::string map_file;  ///< relative to the output directory
};

struct ClosedLoopResult {
  std::vector<LapResult> laps;
  ConstraintMap map;
  FreeParameters params;
  TimedTrajectory trajectory;  ///< last planned trajectory
  std::vector<LapLog> logs;
  std::vector<FeedbackResult> feedback;
};

struct ClosedLoopOptions {
  bool write_artifacts = true;
  /// Called after each lap.
  std::function<void(const LapResult&)> on_lap;
};


TrackModel load_track(const ExperimentConfig& config);
ConstraintMap initial_map(const ExperimentConfig& config, const TrackModel& track);
/// Closed curve fitted to the track centerline.
FreeParameters centerline_parameters(const ExperimentConfig& config, const TrackModel& track);
double search_position_scale(const ExperimentConfig& config, const TrackModel& track);

/// Time-parameterizes curve at its minimum lap time under the map.
TimedTrajectory plan_trajectory(const FreeParameters& params, const ExperimentConfig& config,
                                const ConstraintMap& map);

/// optimize -> run_lap -> feedback_pass, config.laps times. Never throws
/// for aborted laps; artifacts go to config.out_dir when requested.
ClosedLoopResult closed_loop(const ExperimentConfig& config,
                             const ClosedLoopOptions& options = {});

/// Mean of M over cells whose centers are inside the patch and on the track.
double patch_mean(const ConstraintMap& map, const FrictionPatch& patch,
                  const TrackModel& track);

// Persistence.
void write_lap_log_csv(std::ostream& os, const LapLog& log);
LapLog read_lap_log_csv(std::istream& is);
void write_blame_csv(std::ostream& os, const std::vector<BlameEvent>& events);
/// One JSON object per line, fixed key order, 17 significant digits.
std::string lap_result_json(const LapResult& r);
/// Reads "# T <lap_time> N <count>" from a trajectory export.
std::pair<double, int> read_trajectory_header(std::istream& is);

}  // namespace raceline
