// Command-line front end: static optimization, closed-loop experiments and
// offline tools over stored artifacts.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "raceline/closed_loop.hpp"
#include "raceline/curve_io.hpp"
#include "raceline/errors.hpp"
#include "raceline/objective.hpp"
#include "raceline/optimizer.hpp"
#include "raceline/svg.hpp"

namespace fs = std::filesystem;
using namespace raceline;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> laps;
  bool no_feedback = false;
};

void add_common(CLI::App* cmd, Common& c, bool loop_flags) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)")->required();
  cmd->add_option("--seed", c.seed, "Override the random seed");
  cmd->add_option("--out", c.out, "Output directory");
  if (loop_flags) {
    cmd->add_option("--laps", c.laps, "Override the lap count");
    cmd->add_flag("--no-feedback", c.no_feedback, "Disable map feedback");
  }
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.laps) cfg.laps = *c.laps;
  if (c.no_feedback) cfg.feedback_enabled = false;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

ConstraintMap map_or_initial(const std::string& path, const ExperimentConfig& cfg,
                             const TrackModel& track) {
  return path.empty() ? initial_map(cfg, track) : load_map(path);
}

int run_optimize(const Common& c, const std::string& map_path) {
  const ExperimentConfig cfg = resolve(c);
  const TrackModel track = load_track(cfg);
  const ConstraintMap map = map_or_initial(map_path, cfg, track);
  const FreeParameters initial = centerline_parameters(cfg, track);
  const RacelineObjective objective(track, cfg.limits, map, cfg.objective);
  const SearchSpace space = SearchSpace::around(initial, search_position_scale(cfg, track));
  OptimizeOptions opt;
  opt.budget = cfg.optimizer.initial_evaluations;
  opt.sigma0 = cfg.optimizer.sigma0;
  opt.seed = cfg.seed;
  opt.population = cfg.optimizer.population;
  opt.threads = cfg.optimizer.threads;
  const OptimizeResult res = optimize(
      initial, [&](const FreeParameters& p) { return objective(p); }, space, opt);
  const ObjectiveTerms start = objective(initial);
  const TimedTrajectory traj = plan_trajectory(res.best, cfg, map);

  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  write_text(out / "config.json", to_json(cfg));
  save_curve((out / "curve.txt").string(), *traj.curve);
  save_trajectory_csv((out / "trajectory.csv").string(), traj);
  save_map((out / "map.txt").string(), map);
  std::ostringstream hist;
  write_history_csv(hist, res.history);
  write_text(out / "history.csv", hist.str());
  write_text(out / "plan.svg", render_svg(track, traj, map, nullptr, {},
                                          cfg.feedback.deadband_fraction * cfg.limits.a_par_nominal));
  std::printf("centerline lap time  %.4f s\n", start.lap_time);
  std::printf("optimized lap time   %.4f s (cost %.6f, %ld evaluations)\n",
              res.best_terms.lap_time, res.best_terms.cost, res.evaluations);
  std::printf("improvement          %.2f %%\n",
              100.0 * (1.0 - res.best_terms.lap_time / start.lap_time));
  return kOk;
}

int run_loop(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  ClosedLoopOptions opt;
  opt.on_lap = [](const LapResult& r) {
    std::printf("lap %2d  planned %.4f s  executed %.4f s  max e %.4f m  events %3d  map mean %.4f%s\n",
                r.lap, r.planned_lap_time, r.executed_duration, r.max_error, r.event_count,
                r.map_mean, r.aborted ? "  ABORTED" : "");
    std::fflush(stdout);
  };
  closed_loop(cfg, opt);
  std::printf("results written to %s\n", cfg.out_dir.c_str());
  return kOk;
}

int run_evaluate(const Common& c, const std::string& curve_path, const std::string& map_path) {
  const ExperimentConfig cfg = resolve(c);
  const TrackModel track = load_track(cfg);
  const ConstraintMap map = map_or_initial(map_path, cfg, track);
  const NurbsCurve curve = load_curve(curve_path);
  const ObjectiveTerms t = evaluate_curve(curve, track, cfg.limits, map, cfg.objective);
  std::printf("lap_time %.17g\nphi_distance %.17g\nphi_curvature %.17g\ncost %.17g\n",
              t.lap_time, t.phi_distance, t.phi_curvature, t.cost);
  return kOk;
}

int run_render(const Common& c, const std::string& curve_path, const std::string& map_path,
               const std::string& log_path, const std::string& output) {
  const ExperimentConfig cfg = resolve(c);
  const TrackModel track = load_track(cfg);
  const ConstraintMap map = map_or_initial(map_path, cfg, track);
  auto curve = std::make_shared<const NurbsCurve>(load_curve(curve_path));
  const double lap_time =
      min_lap_time_spatial(*curve, cfg.limits, map, cfg.objective.lap_time_samples);
  const TimedTrajectory traj = sample_trajectory(curve, lap_time, cfg.simulation.trajectory_samples);
  std::optional<LapLog> log;
  if (!log_path.empty()) {
    std::ifstream is(log_path);
    if (!is) throw std::runtime_error("cannot read " + log_path);
    log = read_lap_log_csv(is);
  }
  std::string target = output;
  if (target.empty()) target = (fs::path(cfg.out_dir) / "render.svg").string();
  if (fs::path(target).has_parent_path()) fs::create_directories(fs::path(target).parent_path());
  write_text(target, render_svg(track, traj, map, log ? &*log : nullptr, {},
                                cfg.feedback.deadband_fraction * cfg.limits.a_par_nominal));
  std::printf("wrote %s\n", target.c_str());
  return kOk;
}

int run_replay(const Common& c, const std::string& run_dir) {
  const ExperimentConfig cfg = resolve(c);
  const TrackModel track = load_track(cfg);
  ConstraintMap map = initial_map(cfg, track);
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  int mismatches = 0;
  for (int lap = 1;; ++lap) {
    char name[32];
    std::snprintf(name, sizeof name, "lap_%03d", lap);
    const fs::path dir = fs::path(run_dir) / name;
    if (!fs::exists(dir)) break;
    std::ifstream traj_is(dir / "trajectory.csv");
    const auto [lap_time, samples] = read_trajectory_header(traj_is);
    auto curve = std::make_shared<const NurbsCurve>(load_curve((dir / "curve.txt").string()));
    const TimedTrajectory traj = sample_trajectory(curve, lap_time, samples);
    std::ifstream log_is(dir / "laplog.csv");
    if (!log_is) throw std::runtime_error("missing " + (dir / "laplog.csv").string());
    const LapLog log = read_lap_log_csv(log_is);
    FeedbackResult fb;
    if (cfg.feedback_enabled && lap >= cfg.feedback_from_lap) {
      fb = feedback_pass(log, traj, map, cfg.feedback, cfg.limits.a_par_nominal, lap);
    }
    const fs::path lap_out = out / name;
    fs::create_directories(lap_out);
    save_map((lap_out / "map.txt").string(), map);
    std::ostringstream blame;
    write_blame_csv(blame, fb.events);
    write_text(lap_out / "blame.csv", blame.str());
    bool same = true;
    if (fs::exists(dir / "map.txt")) same = load_map((dir / "map.txt").string()) == map;
    mismatches += same ? 0 : 1;
    std::printf("lap %2d  events %3d  cells %4d  stored map %s\n", lap, fb.reported_count(),
                fb.cells_updated, same ? "matches" : "DIFFERS");
  }
  return mismatches == 0 ? kOk : kRuntimeError;
}

int run_make_track(const std::string& name, const std::string& output) {
  save_track_csv(output, make_builtin_track(name));
  std::printf("wrote %s\n", output.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback-adapted raceline optimization"};
  app.require_subcommand(1);
  Common common;
  std::string map_path;
  std::string curve_path;
  std::string log_path;
  std::string output;
  std::string run_dir;
  std::string track_name;

  auto* opt_cmd = app.add_subcommand("optimize", "Static raceline for a track and map");
  add_common(opt_cmd, common, false);
  opt_cmd->add_option("--map", map_path, "Constraint map (default: uniform)");

  auto* loop_cmd = app.add_subcommand("loop", "Closed-loop experiment");
  add_common(loop_cmd, common, true);

  auto* eval_cmd = app.add_subcommand("evaluate", "Lap time and penalties of a stored curve");
  add_common(eval_cmd, common, false);
  eval_cmd->add_option("--curve", curve_path, "Curve file")->required();
  eval_cmd->add_option("--map", map_path, "Constraint map (default: uniform)");

  auto* render_cmd = app.add_subcommand("render", "SVG from stored artifacts");
  add_common(render_cmd, common, false);
  render_cmd->add_option("--curve", curve_path, "Curve file")->required();
  render_cmd->add_option("--map", map_path, "Constraint map (default: uniform)");
  render_cmd->add_option("--laplog", log_path, "Lap log to overlay");
  render_cmd->add_option("-o,--output", output, "SVG path (default: <out>/render.svg)");

  auto* replay_cmd = app.add_subcommand("replay-feedback", "Re-run feedback on stored lap logs");
  add_common(replay_cmd, common, false);
  replay_cmd->add_option("--run", run_dir, "Directory written by 'loop'")->required();

  auto* track_cmd = app.add_subcommand("make-track", "Write a built-in synthetic track");
  track_cmd->add_option("name", track_name, "oval | s_curve")->required();
  track_cmd->add_option("output", output, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*opt_cmd) return run_optimize(common, map_path);
    if (*loop_cmd) return run_loop(common);
    if (*eval_cmd) return run_evaluate(common, curve_path, map_path);
    if (*render_cmd) return run_render(common, curve_path, map_path, log_path, output);
    if (*replay_cmd) return run_replay(common, run_dir);
    if (*track_cmd) return run_make_track(track_name, output);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}
