#include "raceline/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "raceline/curve_fit.hpp"
#include "raceline/curve_io.hpp"
#include "raceline/errors.hpp"
#include "raceline/optimizer.hpp"
#include "raceline/svg.hpp"

namespace raceline {

namespace fs = std::filesystem;

namespace {

constexpr int kWrapDebounce = 5;

VehicleState start_state(const TimedTrajectory& traj, const VehicleParams& vehicle) {
  const TrajectorySample& s0 = traj.samples.front();
  VehicleState st;
  st.x = s0.position.x();
  st.y = s0.position.y();
  st.heading = s0.heading;
  st.speed = s0.v;
  st.steer = std::clamp(std::atan(vehicle.wheelbase * s0.kappa), -vehicle.max_steer,
                        vehicle.max_steer);
  return st;
}

double wrapped_difference(double a, double b) { return std::remainder(a - b, 1.0); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
}

template <class Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

LapLog run_lap(const TimedTrajectory& trajectory, TrackingMpc& controller,
               const FrictionField& friction, const VehicleParams& vehicle,
               const SimulationConfig& sim, const BoundingBox& extent,
               std::mt19937_64& rng) {
  if (trajectory.samples.empty()) throw std::invalid_argument("run_lap: empty trajectory");
  const MpcConfig& mpc = controller.config();
  const double lap_time = trajectory.lap_time;
  const int substeps = std::max(1, static_cast<int>(std::lround(mpc.dt / sim.plant_dt)));
  const double plant_dt = mpc.dt / substeps;
  const double timeout = sim.timeout_factor * lap_time + 2.0;
  std::normal_distribution<double> noise(0.0, 1.0);

  controller.reset();
  LapLog log;
  VehicleState state = start_state(trajectory, vehicle);
  double ref_offset = 0.0;
  bool passed_half = false;
  double prev_u = 0.0;
  int wrap_step = -1;
  double wrap_time = 0.0;

  for (int k = 0;; ++k) {
    const double t = k * mpc.dt;
    Vec2 measured = state.position();
    if (sim.measurement_noise > 0.0) {
      const double nx = noise(rng);
      const double ny = noise(rng);
      measured += sim.measurement_noise * Vec2(nx, ny);
    }
    const ClosestPoint cp = closest_point(trajectory, measured);

    if (wrap_step >= 0 && cp.u > 0.5) wrap_step = -1;
    if (passed_half && wrap_step < 0 && prev_u > 0.9 && cp.u < 0.1) {
      wrap_step = k;
      wrap_time = t;
    }
    if (wrap_step >= 0 && k - wrap_step >= kWrapDebounce) {
      log.rows.resize(wrap_step);
      log.duration = wrap_time;
      return log;
    }
    if (cp.u > 0.5 && cp.u < 0.9) passed_half = true;
    prev_u = cp.u;

    const auto abort = [&](const std::string& reason) {
      log.aborted = true;
      log.abort_reason = reason;
      log.duration = t;
      return log;
    };
    if (cp.distance > sim.abort_error) return abort("tracking error above abort threshold");
    if (!extent.contains(state.position())) return abort("vehicle left the map extent");
    if (t > timeout) return abort("lap timeout");

    // Re-anchor the time-indexed reference when the vehicle is far off-plan.
    const double u_ref = std::fmod(t + ref_offset, lap_time) / lap_time;
    const double lag = wrapped_difference(cp.u, u_ref) * lap_time;
    if (std::abs(lag) > sim.resync_threshold) ref_offset += lag;

    const std::vector<ReferenceState> window =
        reference_window(trajectory, t + ref_offset, mpc.horizon + 1, mpc.dt);
    const MpcSolution sol = controller.solve(state, window);

    LapLogRow row;
    row.step = k;
    row.t = t;
    row.state = state;
    row.command = sol.command;
    row.mu = friction.scale_at(measured);
    row.u_min = cp.u;
    row.i_min = cp.index;
    row.e_hat = cp.distance;
    for (int s = 0; s < substeps; ++s) {
      const PlantStep ps = step(state, sol.command, plant_dt, friction, vehicle);
      row.slip = row.slip || ps.slip;
      state = ps.state;
    }
    log.rows.push_back(row);
  }
}

int FeedbackResult::reported_count() const {
  return static_cast<int>(
      std::count_if(events.begin(), events.end(), [](const BlameEvent& e) { return e.reported; }));
}

FeedbackResult feedback_pass(const LapLog& log, const TimedTrajectory& trajectory,
                             ConstraintMap& map, const FeedbackConfig& cfg,
                             double a_par_nominal, int lap) {
  FeedbackResult out;
  if (log.rows.empty()) return out;
  const int n = trajectory.size();
  std::vector<double> a_par(n);
  for (int i = 0; i < n; ++i) a_par[i] = trajectory.samples[i].a_par;
  const SignZones zones = sign_zones(a_par, cfg.deadband_fraction * a_par_nominal);
  const double floor = cfg.report_fraction * cfg.e_th;

  const auto transition_of = [&](int i_min) {
    if (zones.crossings.empty()) return ((i_min - n / 8) % n + n) % n;
    return transition_index(zones.crossings, i_min);
  };

  // Zone (keyed by its transition index) -> row with the largest error.
  std::map<int, std::size_t> winners;
  std::vector<int> transitions(log.rows.size());
  for (std::size_t r = 0; r < log.rows.size(); ++r) {
    const LapLogRow& row = log.rows[r];
    transitions[r] = transition_of(row.i_min);
    auto [it, inserted] = winners.try_emplace(transitions[r], r);
    if (!inserted && row.e_hat > log.rows[it->second].e_hat) it->second = r;
  }
  std::map<std::size_t, double> applied;  // row -> modulated error
  for (const auto& [zone, r] : winners) applied[r] = modulate_error(log.rows[r].e_hat, cfg);
  if (log.aborted) {
    const std::size_t last = log.rows.size() - 1;
    applied.erase(winners.at(transitions[last]));
    applied[last] = 2.0 * cfg.w_minus * std::max(log.rows[last].e_hat, cfg.e_th);
  }

  std::vector<BlamePoint> points;
  for (std::size_t r = 0; r < log.rows.size(); ++r) {
    const LapLogRow& row = log.rows[r];
    const auto app = applied.find(r);
    const bool reported = row.e_hat > floor;
    if (!reported && app == applied.end()) continue;
    BlameEvent ev;
    ev.lap = lap;
    ev.step = row.step;
    ev.i_min = row.i_min;
    ev.i_transition = transitions[r];
    ev.e_hat = row.e_hat;
    ev.reported = reported;
    if (app != applied.end()) {
      ev.applied = true;
      ev.e = app->second;
      BlameRegion region = blame_region(trajectory, ev.i_transition, ev.i_min, ev.e);
      for (const Vec2& p : region.positions) points.push_back({p, ev.e});
      out.regions.push_back(std::move(region));
    }
    out.events.push_back(ev);
  }
  out.cells_updated = apply_blame(map, points, cfg.blame_radius);
  return out;
}

TrackModel load_track(const ExperimentConfig& config) {
  if (!config.track_file.empty()) return load_track_csv(config.track_file);
  return make_builtin_track(config.builtin_track);
}

ConstraintMap initial_map(const ExperimentConfig& config, const TrackModel& track) {
  return ConstraintMap::covering(track.bounds().inflated(config.map_margin),
                                 config.map_resolution, config.map);
}

FreeParameters centerline_parameters(const ExperimentConfig& config, const TrackModel& track) {
  return fit_centerline(track.centerline(), config.optimizer.control_points).params;
}

double search_position_scale(const ExperimentConfig& config, const TrackModel& track) {
  if (config.optimizer.position_scale > 0.0) return config.optimizer.position_scale;
  double sum = 0.0;
  for (int i = 0; i < track.size(); ++i) sum += 0.5 * (track.w_left()[i] + track.w_right()[i]);
  return sum / track.size();
}

TimedTrajectory plan_trajectory(const FreeParameters& params, const ExperimentConfig& config,
                                const ConstraintMap& map) {
  auto curve = std::make_shared<const NurbsCurve>(apply_closure(params));
  const double lap_time =
      min_lap_time_spatial(*curve, config.limits, map, config.objective.lap_time_samples);
  return sample_trajectory(curve, lap_time, config.simulation.trajectory_samples);
}

double patch_mean(const ConstraintMap& map, const FrictionPatch& patch,
                  const TrackModel& track) {
  double sum = 0.0;
  int count = 0;
  for (int ix = 0; ix < map.nx(); ++ix) {
    for (int iy = 0; iy < map.ny(); ++iy) {
      const Vec2 c = map.cell_center(ix, iy);
      if (!patch.contains(c) || track.boundary_excess(c) > 0.0) continue;
      sum += map.m(ix, iy);
      ++count;
    }
  }
  return count > 0 ? sum / count : std::nan("");
}

ClosedLoopResult closed_loop(const ExperimentConfig& config, const ClosedLoopOptions& options) {
  config.validate();
  const TrackModel track = load_track(config);
  ClosedLoopResult result;
  result.map = initial_map(config, track);
  result.params = centerline_parameters(config, track);
  const SearchSpace space =
      SearchSpace::around(result.params, search_position_scale(config, track));
  const RacelineObjective objective(track, config.limits, result.map, config.objective);
  const CandidateObjective score = [&](const FreeParameters& p) { return objective(p); };
  const BoundingBox extent = result.map.extent();

  const fs::path out = config.out_dir;
  if (options.write_artifacts) {
    fs::create_directories(out);
    write_file(out / "config.json", to_json(config));
  }

  TrackingMpc controller(config.mpc);
  std::mt19937_64 plant_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  CmaState state;
  bool warm = false;
  std::vector<HistoryRow> history;
  long total_evaluations = 0;
  std::string results_text;

  for (int lap = 1; lap <= config.laps; ++lap) {
    OptimizeOptions opt;
    opt.budget = lap == 1 ? config.optimizer.initial_evaluations
                          : config.optimizer.iterations_per_lap;
    opt.sigma0 = config.optimizer.sigma0;
    opt.seed = config.seed;
    opt.population = config.optimizer.population;
    opt.threads = config.optimizer.threads;
    OptimizeResult best =
        optimize(result.params, score, space, opt, warm ? &state : nullptr);
    for (HistoryRow row : best.history) {
      row.evaluations += total_evaluations;
      history.push_back(row);
    }
    total_evaluations += best.evaluations;
    state = std::move(best.state);
    warm = true;
    result.params = best.best;
    result.trajectory = plan_trajectory(result.params, config, result.map);

    LapLog log = run_lap(result.trajectory, controller, config.friction, config.vehicle,
                         config.simulation, extent, plant_rng);

    LapResult lr;
    lr.lap = lap;
    lr.planned_lap_time = result.trajectory.lap_time;
    lr.executed_duration = log.duration;
    lr.aborted = log.aborted;
    lr.best_cost = best.best_terms.cost;
    lr.evaluations = total_evaluations;
    double sum_e = 0.0;
    for (const LapLogRow& row : log.rows) {
      lr.max_error = std::max(lr.max_error, row.e_hat);
      sum_e += row.e_hat;
      lr.slip_steps += row.slip ? 1 : 0;
    }
    lr.mean_error = log.rows.empty() ? 0.0 : sum_e / log.rows.size();

    FeedbackResult fb;
    if (config.feedback_enabled && lap >= config.feedback_from_lap) {
      fb = feedback_pass(log, result.trajectory, result.map, config.feedback,
                         config.limits.a_par_nominal, lap);
      lr.feedback_applied = true;
      lr.event_count = fb.reported_count();
      lr.cells_updated = fb.cells_updated;
    }
    const auto m = result.map.m_values();
    lr.map_mean = std::accumulate(m.begin(), m.end(), 0.0) / static_cast<double>(m.size());
    lr.map_min = *std::min_element(m.begin(), m.end());
    lr.map_max = *std::max_element(m.begin(), m.end());

    char name[32];
    std::snprintf(name, sizeof name, "lap_%03d", lap);
    lr.map_file = std::string(name) + "/map.txt";
    results_text += lap_result_json(lr) + "\n";

    if (options.write_artifacts) {
      const fs::path dir = out / name;
      fs::create_directories(dir);
      save_curve((dir / "curve.txt").string(), *result.trajectory.curve);
      save_trajectory_csv((dir / "trajectory.csv").string(), result.trajectory);
      save_map((dir / "map.txt").string(), result.map);
      write_file(dir / "laplog.csv", to_text([&](std::ostream& os) { write_lap_log_csv(os, log); }));
      write_file(dir / "blame.csv", to_text([&](std::ostream& os) { write_blame_csv(os, fb.events); }));
      write_file(dir / "lap.svg", render_svg(track, result.trajectory, result.map, &log, fb.regions,
                                             config.feedback.deadband_fraction *
                                                 config.limits.a_par_nominal));
      write_file(out / "history.csv",
                 to_text([&](std::ostream& os) { write_history_csv(os, history); }));
      write_file(out / "results.jsonl", results_text);
    }
    if (options.on_lap) options.on_lap(lr);
    result.laps.push_back(lr);
    result.logs.push_back(std::move(log));
    result.feedback.push_back(std::move(fb));
  }
  return result;
}

void write_lap_log_csv(std::ostream& os, const LapLog& log) {
  os << "# duration " << format_double(log.duration) << " aborted " << (log.aborted ? 1 : 0)
     << "\n";
  os << "step,t,x,y,heading,steer,speed,accel_cmd,steer_rate_cmd,slip,mu,u_min,i_min,e_hat\n";
  for (const LapLogRow& r : log.rows) {
    os << r.step << ',' << format_double(r.t) << ',' << format_double(r.state.x) << ','
       << format_double(r.state.y) << ',' << format_double(r.state.heading) << ','
       << format_double(r.state.steer) << ',' << format_double(r.state.speed) << ','
       << format_double(r.command.accel) << ',' << format_double(r.command.steer_rate) << ','
       << (r.slip ? 1 : 0) << ',' << format_double(r.mu) << ',' << format_double(r.u_min)
       << ',' << r.i_min << ',' << format_double(r.e_hat) << "\n";
  }
}

LapLog read_lap_log_csv(std::istream& is) {
  LapLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      while (h >> key) {
        if (key == "duration") h >> log.duration;
        if (key == "aborted") {
          int a = 0;
          h >> a;
          log.aborted = a != 0;
        }
      }
      continue;
    }
    if (line.rfind("step", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    LapLogRow r;
    int slip = 0;
    if (!(row >> r.step >> r.t >> r.state.x >> r.state.y >> r.state.heading >> r.state.steer >>
          r.state.speed >> r.command.accel >> r.command.steer_rate >> slip >> r.mu >> r.u_min >>
          r.i_min >> r.e_hat)) {
      throw std::runtime_error("lap log: malformed row");
    }
    r.slip = slip != 0;
    log.rows.push_back(r);
  }
  return log;
}

void write_blame_csv(std::ostream& os, const std::vector<BlameEvent>& events) {
  os << "lap,step,i_min,i_transition,e_hat,e,reported,applied\n";
  for (const BlameEvent& e : events) {
    os << e.lap << ',' << e.step << ',' << e.i_min << ',' << e.i_transition << ','
       << format_double(e.e_hat) << ',' << format_double(e.e) << ',' << (e.reported ? 1 : 0)
       << ',' << (e.applied ? 1 : 0) << "\n";
  }
}

std::string lap_result_json(const LapResult& r) {
  std::ostringstream os;
  os << "{\"lap\":" << r.lap << ",\"planned_lap_time\":" << format_double(r.planned_lap_time)
     << ",\"executed_duration\":" << format_double(r.executed_duration)
     << ",\"max_error\":" << format_double(r.max_error)
     << ",\"mean_error\":" << format_double(r.mean_error)
     << ",\"event_count\":" << r.event_count << ",\"cells_updated\":" << r.cells_updated
     << ",\"slip_steps\":" << r.slip_steps << ",\"aborted\":" << (r.aborted ? "true" : "false")
     << ",\"feedback_applied\":" << (r.feedback_applied ? "true" : "false")
     << ",\"best_cost\":" << format_double(r.best_cost) << ",\"evaluations\":" << r.evaluations
     << ",\"map_mean\":" << format_double(r.map_mean)
     << ",\"map_min\":" << format_double(r.map_min)
     << ",\"map_max\":" << format_double(r.map_max) << ",\"map_file\":\"" << r.map_file
     << "\"}";
  return os.str();
}

std::pair<double, int> read_trajectory_header(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("# T ", 0) != 0) continue;
    std::istringstream h(line.substr(2));
    std::string tk;
    std::string nk;
    double t = 0.0;
    int n = 0;
    if (h >> tk >> t >> nk >> n && tk == "T" && nk == "N") return {t, n};
  }
  throw std::runtime_error("trajectory file has no '# T .. N ..' header");
}

}  // namespace raceline
