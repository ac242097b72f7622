#include <benchmark/benchmark.h>

#include <random>

#include "raceline/closed_loop.hpp"
#include "raceline/cmaes.hpp"
#include "raceline/mpc.hpp"
#include "raceline/objective.hpp"

using namespace raceline;

namespace {

struct Scene {
  ExperimentConfig cfg;
  TrackModel track;
  ConstraintMap map;
  FreeParameters params;
  TimedTrajectory traj;

  Scene() {
    cfg.builtin_track = "oval";
    track = load_track(cfg);
    map = initial_map(cfg, track);
    params = centerline_parameters(cfg, track);
    traj = plan_trajectory(params, cfg, map);
  }
};

const Scene& scene() {
  static const Scene s;
  return s;
}

void BM_NurbsEvaluate(benchmark::State& state) {
  const NurbsCurve c = apply_closure(scene().params);
  double u = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.evaluate(u));
    u = u + 0.001 < 1.0 ? u + 0.001 : 0.0;
  }
}
BENCHMARK(BM_NurbsEvaluate);

void BM_LapTimeSpatial(benchmark::State& state) {
  const Scene& s = scene();
  const NurbsCurve c = apply_closure(s.params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_lap_time_spatial(c, s.cfg.limits, s.map, state.range(0)));
  }
}
BENCHMARK(BM_LapTimeSpatial)->Arg(256)->Arg(1024);

void BM_Objective(benchmark::State& state) {
  const Scene& s = scene();
  const RacelineObjective objective(s.track, s.cfg.limits, s.map, s.cfg.objective);
  for (auto _ : state) benchmark::DoNotOptimize(objective(s.params).cost);
}
BENCHMARK(BM_Objective);

void BM_MpcSolve(benchmark::State& state) {
  const Scene& s = scene();
  const auto window = reference_window(s.traj, 0.5, s.cfg.mpc.horizon + 1, s.cfg.mpc.dt);
  const VehicleState x{window[0].position.x() + 0.05, window[0].position.y(),
                       window[0].heading, 0.0, window[0].speed};
  for (auto _ : state) {
    TrackingMpc mpc(s.cfg.mpc);
    benchmark::DoNotOptimize(mpc.solve(x, window).cost);
  }
}
BENCHMARK(BM_MpcSolve);

void BM_CmaStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CmaState cma = make_cma_state(Eigen::VectorXd::Ones(n), 0.3, 1);
  const BatchEvaluator eval =
      parallel_evaluator([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cma_step(cma, eval).best_cost);
}
BENCHMARK(BM_CmaStep)->Arg(20)->Arg(55);

}  // namespace

BENCHMARK_MAIN();
