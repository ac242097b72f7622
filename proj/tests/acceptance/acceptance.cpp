// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "raceline/blame.hpp"
#include "raceline/closed_loop.hpp"
#include "raceline/curve_fit.hpp"
#include "raceline/free_parameters.hpp"
#include "raceline/nurbs.hpp"
#include "raceline/optimizer.hpp"
#include "raceline/time_parameterization.hpp"
#include "test_support.hpp"

using namespace raceline;
namespace rt = raceline::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
    }
  }
  void note(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    if (!detail.empty()) detail += "; ";
    detail += buf;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path g_work;

fs::path config_path(const std::string& name) {
  return fs::path(RACELINE_DATA_DIR) / "configs" / name;
}

ClosedLoopResult run_experiment(ExperimentConfig cfg, const std::string& tag) {
  cfg.out_dir = (g_work / tag).string();
  fs::remove_all(cfg.out_dir);
  std::fprintf(stderr, "  running %s (%d laps)\n", tag.c_str(), cfg.laps);
  ClosedLoopOptions opt;
  opt.on_lap = [](const LapResult& r) {
    std::fprintf(stderr, "    lap %2d  T %.3f  exec %.3f  max e %.3f%s\n", r.lap,
                 r.planned_lap_time, r.executed_duration, r.max_error,
                 r.aborted ? "  aborted" : "");
  };
  return closed_loop(cfg, opt);
}

std::string lap_dir(int lap) {
  char name[32];
  std::snprintf(name, sizeof name, "lap_%03d", lap);
  return name;
}

bool on_track(const TrackModel& track, const Vec2& p) { return track.boundary_excess(p) <= 0.0; }

// Centers inside the patch and on the track; `reached` keeps only cells the
// feedback has updated at least once.
double patch_cells_mean(const ConstraintMap& map, const FrictionPatch& patch,
                        const TrackModel& track, bool reached, int* count) {
  double sum = 0.0;
  int n = 0;
  for (int ix = 0; ix < map.nx(); ++ix) {
    for (int iy = 0; iy < map.ny(); ++iy) {
      const Vec2 c = map.cell_center(ix, iy);
      if (!patch.contains(c) || !on_track(track, c)) continue;
      if (reached && map.v(ix, iy) == map.params().v_init) continue;
      sum += map.m(ix, iy);
      ++n;
    }
  }
  if (count) *count = n;
  return n ? sum / n : std::nan("");
}

double on_track_mean(const ConstraintMap& map, const TrackModel& track) {
  double sum = 0.0;
  int n = 0;
  for (int ix = 0; ix < map.nx(); ++ix) {
    for (int iy = 0; iy < map.ny(); ++iy) {
      if (!on_track(track, map.cell_center(ix, iy))) continue;
      sum += map.m(ix, iy);
      ++n;
    }
  }
  return sum / n;
}

// --- 1 -------------------------------------------------------------------

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  const auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
  };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool inside_hull(const std::vector<Vec2>& hull, const Vec2& p, double tol) {
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const Vec2 e = b - a;
    if (e.x() * (p - a).y() - e.y() * (p - a).x() < -tol * e.norm()) return false;
  }
  return true;
}

bool near_knot(const NurbsCurve& c, double u, double margin) {
  for (double k : c.knots()) {
    if (std::abs(u - k) < margin) return true;
  }
  return false;
}

Outcome criterion_1() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double pou = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const NurbsCurve c = rt::random_open_curve(rng, 6 + trial % 20);
    for (int s = 0; s < 200; ++s) {
      const BasisValues b = basis_functions(unit(rng), c.knots(), 3);
      double sum = 0.0;
      for (double v : b.values) {
        out.check(v >= -1e-15, "basis nonnegative");
        sum += v;
      }
      pou = std::max(pou, std::abs(sum - 1.0));
    }
  }
  out.check(pou < 1e-12, "partition of unity");

  bool hull_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const NurbsCurve c = rt::random_open_curve(rng, 8 + trial % 12);
    const std::vector<Vec2> hull = convex_hull(c.control_points());
    for (int s = 0; s < 200; ++s) {
      const double u = unit(rng);
      const Vec2 p = c.evaluate(u);
      const BasisValues b = basis_functions(u, c.knots(), 3);
      std::vector<Vec2> active;
      for (int j = 0; j <= 3; ++j) active.push_back(c.control_points()[b.span - 3 + j]);
      hull_ok = hull_ok && inside_hull(hull, p, 1e-12) &&
                inside_hull(convex_hull(active), p, 1e-12);
    }
  }
  out.check(hull_ok, "convex hull");

  double d1_err = 0.0, d2_err = 0.0;
  const double h = 1e-4;
  for (int trial = 0; trial < 50; ++trial) {
    const NurbsCurve c = rt::random_open_curve(rng, 10);
    for (int s = 0; s < 40; ++s) {
      const double u = 0.01 + 0.98 * unit(rng);
      if (near_knot(c, u, 3 * h)) continue;
      const auto f = [&](double du) { return c.evaluate(u + du); };
      const Vec2 fd1 = (8.0 * (f(h) - f(-h)) - (f(2 * h) - f(-2 * h))) / (12.0 * h);
      const Vec2 fd2 =
          (-f(2 * h) + 16.0 * f(h) - 30.0 * f(0) + 16.0 * f(-h) - f(-2 * h)) / (12.0 * h * h);
      const Vec2 a1 = c.derivative(u, 1);
      const Vec2 a2 = c.derivative(u, 2);
      d1_err = std::max(d1_err, (a1 - fd1).norm() / std::max(1.0, a1.norm()));
      d2_err = std::max(d2_err, (a2 - fd2).norm() / std::max(1.0, a2.norm()));
    }
  }
  out.check(d1_err < 1e-6, "first derivative");
  out.check(d2_err < 1e-6, "second derivative");

  double lin = 0.0;
  for (int n : {3, 5, 9, 16, 30}) {
    const Vec2 a(unit(rng), unit(rng)), b(3 * unit(rng), -2 * unit(rng));
    const NurbsCurve c = rt::linear_precision_curve(a, b, n);
    for (int s = 0; s <= 100; ++s) {
      const double u = s / 100.0;
      lin = std::max(lin, (c.evaluate(u) - (a + u * b)).norm());
    }
  }
  out.check(lin < 1e-10, "linear precision");

  const double dt = seconds_since(t0);
  out.check(dt < 10.0, "runtime");
  out.note("pou %.1e, d1 rel %.1e, d2 rel %.1e, linear %.1e, %.2f s", pou, d1_err, d2_err, lin,
           dt);
  return out;
}

// --- 2 -------------------------------------------------------------------

Outcome criterion_2() {
  Outcome out;
  std::mt19937_64 rng(202);
  double e0 = 0.0, e1 = 0.0, e2 = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const NurbsCurve c = apply_closure(rt::random_free_parameters(rng, 16));
    e0 = std::max(e0, (c.evaluate(1.0) - c.evaluate(0.0)).norm());
    e1 = std::max(e1, (c.derivative(1.0, 1) - c.derivative(0.0, 1)).norm());
    e2 = std::max(e2, (c.derivative(1.0, 2) - c.derivative(0.0, 2)).norm());
  }
  out.check(e0 < 1e-9, "position seam");
  out.check(e1 < 1e-6, "first derivative seam");
  out.check(e2 < 1e-4, "second derivative seam");
  out.note("max seam jumps %.1e / %.1e / %.1e over 100 curves", e0, e1, e2);
  return out;
}

// --- 3 -------------------------------------------------------------------

Outcome criterion_3() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  DynamicLimits lim;
  double worst_const = 0.0, worst_spatial = 0.0, worst_unit = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const NurbsCurve c = apply_closure(rt::random_free_parameters(rng, 16));
    BoundingBox box{Vec2::Constant(1e9), Vec2::Constant(-1e9)};
    for (int k = 0; k < 2000; ++k) {
      const Vec2 p = c.evaluate(k / 2000.0);
      box.min = box.min.cwiseMin(p);
      box.max = box.max.cwiseMax(p);
    }
    ConstraintMap unit_map = ConstraintMap::covering(box.inflated(1.0), 0.25, MapParams{});
    ConstraintMap map = unit_map;
    std::uniform_real_distribution<double> m(0.3, 1.6);
    for (int ix = 0; ix < map.nx(); ++ix)
      for (int iy = 0; iy < map.ny(); ++iy) map.set_m(ix, iy, m(rng));

    const int samples = 1024;
    const double tc = min_lap_time_const(c, lim, samples);
    const double ts = min_lap_time_spatial(c, lim, map, samples);
    const double sc = rt::scan_lap_time(
        [&](double t) { return rt::lap_time_feasible(c, lim, t, samples, [](const Vec2&) { return 1.0; }); },
        0.5 * tc);
    const double ss = rt::scan_lap_time(
        [&](double t) {
          return rt::lap_time_feasible(c, lim, t, samples, [&](const Vec2& p) { return map.scale(p); });
        },
        0.5 * ts);
    worst_const = std::max(worst_const, std::abs(tc - sc) / sc);
    worst_spatial = std::max(worst_spatial, std::abs(ts - ss) / ss);
    const double t_unit = min_lap_time_spatial(c, lim, unit_map);
    worst_unit = std::max(worst_unit, std::abs(t_unit - min_lap_time_const(c, lim)) / t_unit);
  }
  out.check(worst_const < 1e-3, "constant limits vs scan");
  out.check(worst_spatial < 1e-3, "spatial limits vs scan");
  out.check(worst_unit <= 4 * std::numeric_limits<double>::epsilon(), "unit map equals constant");

  const CenterlineFit fit = fit_centerline(rt::circle_points(Vec2::Zero(), 2.0, 400), 16);
  DynamicLimits circle;
  circle.v_max = 1e6;
  circle.a_par_nominal = circle.a_perp_nominal = 8.0;
  const double expected = 2.0 * std::numbers::pi * 2.0 / std::sqrt(8.0 * 2.0);
  const double circle_err =
      std::abs(min_lap_time_const(apply_closure(fit.params), circle) - expected) / expected;
  out.check(circle_err < 0.02, "circle analytic");

  const double dt = seconds_since(t0);
  out.check(dt < 60.0, "runtime");
  out.note("scan rel err const %.1e spatial %.1e, unit-map rel diff %.1e, circle %.2f%%, %.1f s",
           worst_const, worst_spatial, worst_unit, 100 * circle_err, dt);
  return out;
}

// --- 4 -------------------------------------------------------------------

Outcome criterion_4() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> pos(1e-6, 10.0), err(-5.0, 5.0);
  bool gain_ok = true, clamp_ok = true;
  for (int k = 0; k < 100000; ++k) {
    const double q = 0.1 * pos(rng);
    const CellUpdate u = kalman_update_cell(std::uniform_real_distribution<double>(0.05, 2.0)(rng),
                                            pos(rng), err(rng), pos(rng), q, 0.05, 2.0);
    gain_ok = gain_ok && u.gain > 0.0 && u.gain < 1.0 && u.v > q;
    clamp_ok = clamp_ok && u.m >= 0.05 && u.m <= 2.0;
  }
  out.check(gain_ok, "gain in (0,1)");
  out.check(clamp_ok, "clamping");

  double fp = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double r = pos(rng), q = 0.1 * pos(rng);
    double v = pos(rng), prev = -1.0;
    for (int k = 0; k < 1000000 && v != prev; ++k) {
      prev = v;
      v = kalman_update_cell(1.0, v, 0.0, r, q, 0.05, 2.0).v;
    }
    fp = std::max(fp, std::abs(v - steady_state_variance(r, q)));
  }
  out.check(fp < 1e-9, "fixed point");

  ConstraintMap map(Vec2(0, 0), 0.25, 20, 20, MapParams{});
  for (int ix = 0; ix < 20; ++ix)
    for (int iy = 0; iy < 20; ++iy) map.set_m(ix, iy, 0.5 + 0.05 * ix);
  const ConstraintMap before = map;
  const int updated = apply_blame(map, {}, 0.5);
  out.check(updated == 0 && map == before, "empty blame identity");

  const double dt = seconds_since(t0);
  out.check(dt < 5.0, "runtime");
  out.note("fixed point err %.1e, %.2f s", fp, dt);
  return out;
}

// --- 5 -------------------------------------------------------------------

Outcome criterion_5() {
  Outcome out;
  std::mt19937_64 rng(505);
  int mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 16 + static_cast<int>(rng() % 2048);
    std::uniform_int_distribution<int> idx(0, n - 1);
    std::set<int> zs;
    const int count = 1 + static_cast<int>(rng() % 16);
    while (static_cast<int>(zs.size()) < count) zs.insert(idx(rng));
    const int i_min = idx(rng);
    int oracle = -1;
    for (int k = 1; k <= n && oracle < 0; ++k) {
      const int j = ((i_min - k) % n + n) % n;
      if (zs.count(j)) oracle = j;
    }
    const std::vector<int> z(zs.begin(), zs.end());
    mismatches += transition_index(z, i_min) != oracle;
  }
  out.check(mismatches == 0, "circular predecessor oracle");

  // Simulated laps with low-grip patches: every blamed region stays inside
  // one acceleration phase.
  ExperimentConfig cfg = load_config(config_path("oval_patches.json").string());
  const TrackModel track = load_track(cfg);
  const ConstraintMap map = initial_map(cfg, track);
  const FreeParameters params = centerline_parameters(cfg, track);
  int regions = 0, violations = 0;
  for (double slow : {1.0, 1.15, 1.4}) {
    TimedTrajectory traj = plan_trajectory(params, cfg, map);
    traj = sample_trajectory(traj.curve, traj.lap_time * slow, traj.size());
    TrackingMpc mpc(cfg.mpc);
    std::mt19937_64 plant(cfg.seed);
    const LapLog log = run_lap(traj, mpc, cfg.friction, cfg.vehicle, cfg.simulation,
                               map.extent(), plant);
    std::vector<double> a_par;
    for (const auto& s : traj.samples) a_par.push_back(s.a_par);
    const SignZones zones =
        sign_zones(a_par, cfg.feedback.deadband_fraction * cfg.limits.a_par_nominal);
    for (const LapLogRow& row : log.rows) {
      const int it = transition_index(zones.crossings, row.i_min);
      const BlameRegion region = blame_region(traj, it, row.i_min, 0.0);
      ++regions;
      for (std::size_t k = 1; k + 1 < region.indices.size(); ++k) {
        if (zones.signs[region.indices[k]] != zones.signs[region.indices[1]]) {
          ++violations;
          break;
        }
      }
    }
    ConstraintMap scratch = map;
    const FeedbackResult fb =
        feedback_pass(log, traj, scratch, cfg.feedback, cfg.limits.a_par_nominal, 1);
    for (const BlameEvent& e : fb.events) {
      out.check(std::binary_search(zones.crossings.begin(), zones.crossings.end(),
                                   e.i_transition),
                "event references a zone transition");
    }
  }
  out.check(violations == 0, "zone constancy");
  out.note("10000 random (Z, i_min) cases, %d mismatches; %d simulated regions, %d violations",
           mismatches, regions, violations);
  return out;
}

// --- 6 -------------------------------------------------------------------

Outcome criterion_6() {
  Outcome out;
  const auto t0 = Clock::now();
  for (const char* name : {"oval", "s_curve"}) {
    ExperimentConfig cfg = load_config(config_path("oval_baseline.json").string());
    cfg.track_file = (fs::path(RACELINE_DATA_DIR) / "tracks" / (std::string(name) + ".csv")).string();
    const TrackModel track = load_track(cfg);
    const ConstraintMap map = initial_map(cfg, track);
    const FreeParameters init = centerline_parameters(cfg, track);
    const RacelineObjective objective(track, cfg.limits, map, cfg.objective);
    const double centerline = objective(init).lap_time;
    OptimizeOptions opt;
    opt.budget = 15000;
    opt.seed = cfg.seed;
    opt.sigma0 = cfg.optimizer.sigma0;
    const OptimizeResult r =
        optimize(init, objective, SearchSpace::around(init, search_position_scale(cfg, track)), opt);
    const double ratio = r.best_terms.lap_time / centerline;
    out.check(ratio <= 0.95, std::string(name) + " gain");
    out.check(r.best_terms.phi_distance * cfg.objective.lambda_dist < 1e-2 &&
                  r.best_terms.phi_curvature * cfg.objective.lambda_curv < 1e-2,
              std::string(name) + " penalties");
    out.note("%s: centerline %.3f s -> %.3f s (ratio %.3f, %ld evals, seed %llu)", name,
             centerline, r.best_terms.lap_time, ratio, r.evaluations,
             static_cast<unsigned long long>(opt.seed));
  }
  const double dt = seconds_since(t0);
  out.check(dt < 600.0, "runtime");
  out.note("%.0f s", dt);
  return out;
}

// --- 7 -------------------------------------------------------------------

Outcome criterion_7() {
  Outcome out;
  const ExperimentConfig cfg = load_config(config_path("oval_patches.json").string());
  ExperimentConfig plain = cfg;
  plain.friction.patches.clear();
  const ClosedLoopResult with = run_experiment(cfg, "c7_patches");
  const ClosedLoopResult without = run_experiment(plain, "c7_no_patches");
  const TrackModel track = load_track(cfg);
  const fs::path dir = g_work / "c7_patches";

  const int first = cfg.feedback_from_lap;
  const int deadline = first + 4;
  for (std::size_t p = 0; p < cfg.friction.patches.size(); ++p) {
    const FrictionPatch& patch = cfg.friction.patches[p];
    int reached_lap = -1;
    double at = std::nan(""), all = std::nan("");
    int reached_cells = 0;
    for (int lap = first; lap <= std::min(deadline, cfg.laps); ++lap) {
      const ConstraintMap m = load_map((dir / lap_dir(lap) / "map.txt").string());
      at = patch_cells_mean(m, patch, track, true, &reached_cells);
      all = patch_cells_mean(m, patch, track, false, nullptr);
      if (reached_cells > 0 && at < 0.5) {
        reached_lap = lap;
        break;
      }
    }
    out.check(reached_lap > 0, "patch " + std::to_string(p + 1) + " mean M below 0.5");
    int cells_final = 0;
    const double final_reached = patch_cells_mean(with.map, patch, track, true, &cells_final);
    out.note("patch %zu: reached-cell mean %.3f by lap %d (%d cells; all on-track cells %.3f), "
             "final %.3f",
             p + 1, at, reached_lap, reached_cells, all, final_reached);
  }
  const LapResult& last = with.laps.back();
  out.check(!last.aborted && last.max_error < cfg.feedback.e_th, "final-lap error");
  const double t_plain = without.laps.back().planned_lap_time;
  out.check(last.planned_lap_time > t_plain, "planned T increases");
  out.note("final lap max e %.3f m (e_th %.2f), planned T %.3f s vs %.3f s without patches, seed %llu",
           last.max_error, cfg.feedback.e_th, last.planned_lap_time, t_plain,
           static_cast<unsigned long long>(cfg.seed));
  return out;
}

// --- 8 -------------------------------------------------------------------

Outcome criterion_8() {
  Outcome out;
  const ExperimentConfig cfg = load_config(config_path("oval_headroom.json").string());
  ExperimentConfig control = cfg;
  control.feedback_enabled = false;
  const ClosedLoopResult fb = run_experiment(cfg, "c8_feedback");
  const ClosedLoopResult off = run_experiment(control, "c8_control");

  const int pre = cfg.feedback_from_lap - 1;
  const int last = std::min(cfg.laps, pre + 10);
  if (pre < 1 || last <= pre) {
    out.check(false, "config needs pre-feedback laps");
    return out;
  }
  const double t_pre = fb.laps[pre - 1].planned_lap_time;
  const double t_fb = fb.laps[last - 1].planned_lap_time;
  const double t_off = off.laps[last - 1].planned_lap_time;
  const double gain_pre = 1.0 - t_fb / t_pre;
  const double gain_control = 1.0 - t_fb / t_off;
  out.check(gain_pre >= 0.05, "gain vs pre-feedback lap");
  out.check(gain_control >= 0.05, "gain vs feedback-off control");
  const LapResult& lr = fb.laps[last - 1];
  out.check(!lr.aborted && lr.max_error < cfg.feedback.e_th, "final-lap error");
  out.note("pre-feedback T %.3f s (lap %d); lap %d T %.3f s with feedback, %.3f s without; "
           "gain %.1f%% vs pre-feedback, %.1f%% vs control; max e %.3f m",
           t_pre, pre, last, t_fb, t_off, 100 * gain_pre, 100 * gain_control, lr.max_error);
  return out;
}

// --- 9 -------------------------------------------------------------------

Outcome criterion_9() {
  Outcome out;
  std::vector<double> exec, means;
  for (const char* mu : {"0.5", "0.75", "1.0"}) {
    const ExperimentConfig cfg =
        load_config(config_path(std::string("oval_mu_") + mu + ".json").string());
    const ClosedLoopResult r = run_experiment(cfg, std::string("c9_mu_") + mu);
    // Converged: completed laps among the final five, last three of them.
    std::vector<double> done;
    for (int k = static_cast<int>(r.laps.size()) - 1;
         k >= std::max(0, static_cast<int>(r.laps.size()) - 5) && done.size() < 3; --k) {
      if (!r.laps[k].aborted) done.push_back(r.laps[k].executed_duration);
    }
    out.check(done.size() >= 2, std::string("completed laps at mu ") + mu);
    double sum = 0.0;
    for (double d : done) sum += d;
    exec.push_back(done.empty() ? std::nan("") : sum / done.size());
    means.push_back(on_track_mean(r.map, load_track(cfg)));
    out.note("mu %s: executed %.3f s (%zu laps), on-track map mean %.3f", mu, exec.back(),
             done.size(), means.back());
  }
  out.check(exec[0] > exec[1] && exec[1] > exec[2], "executed lap time ordering");
  out.check(means[0] < means[1] && means[1] < means[2], "map mean ordering");
  return out;
}

// --- 10 ------------------------------------------------------------------

Outcome criterion_10() {
  Outcome out;
  const ExperimentConfig cfg = load_config(config_path("oval_patches.json").string());
  run_experiment(cfg, "c10_a");
  run_experiment(cfg, "c10_b");
  const auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(g_work / "c10_a" / "results.jsonl");
  const std::string b = slurp(g_work / "c10_b" / "results.jsonl");
  out.check(!a.empty() && a == b, "results byte-identical");
  out.check(slurp(g_work / "c10_a" / lap_dir(cfg.laps) / "map.txt") ==
                slurp(g_work / "c10_b" / lap_dir(cfg.laps) / "map.txt"),
            "final maps byte-identical");
  out.note("%zu bytes of results, seed %llu", a.size(), static_cast<unsigned long long>(cfg.seed));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  std::string work = (fs::temp_directory_path() / "raceline_acceptance").string();
  app.add_option("--criterion", selected, "Criterion number(s), 1-10 (default: all)")
      ->check(CLI::Range(1, 10));
  app.add_option("--work", work, "Scratch directory for experiment runs");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  g_work = work;
  fs::create_directories(g_work);

  const std::map<int, std::pair<const char*, std::function<Outcome()>>> table{
      {1, {"NURBS correctness", criterion_1}},
      {2, {"lap closure", criterion_2}},
      {3, {"lap-time scaler", criterion_3}},
      {4, {"Kalman map", criterion_4}},
      {5, {"blame attribution", criterion_5}},
      {6, {"static optimization gain", criterion_6}},
      {7, {"local friction adaptation", criterion_7}},
      {8, {"feedback activation improvement", criterion_8}},
      {9, {"global friction ordering", criterion_9}},
      {10, {"determinism", criterion_10}},
  };
  int failures = 0;
  for (int id : selected) {
    const auto& [name, fn] = table.at(id);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d %-32s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
