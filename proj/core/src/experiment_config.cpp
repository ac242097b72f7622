#include "raceline/experiment_config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "raceline/errors.hpp"

namespace raceline {

using nlohmann::json;

namespace {

/// Reads keys of one JSON object and reports leftovers as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(label() + " must be an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <class T>
  bool get(const std::string& key, T& out) {
    if (!node_.contains(key)) return false;
    used_.insert(key);
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(label() + "." + key + ": " + e.what());
    }
    return true;
  }

  const json* child(const std::string& key) {
    if (!node_.contains(key)) return nullptr;
    used_.insert(key);
    return &node_.at(key);
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!used_.count(item.key())) throw ConfigError("unknown key " + label() + "." + item.key());
    }
  }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

Vec2 read_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

FrictionPatch read_patch(const json& j, const std::string& where) {
  Section s(j, where);
  FrictionPatch p;
  std::string type = "circle";
  s.get("type", type);
  s.get("scale", p.scale);
  if (type == "circle") {
    p.shape = FrictionPatch::Shape::kCircle;
    const json* c = s.child("center");
    if (!c) throw ConfigError(where + ": circle needs center");
    p.center = read_point(*c, where + ".center");
    if (!s.get("radius", p.radius)) throw ConfigError(where + ": circle needs radius");
  } else if (type == "polygon") {
    p.shape = FrictionPatch::Shape::kPolygon;
    const json* pts = s.child("points");
    if (!pts || !pts->is_array()) throw ConfigError(where + ": polygon needs points");
    for (const json& q : *pts) p.polygon.push_back(read_point(q, where + ".points"));
  } else {
    throw ConfigError(where + ": unknown patch type '" + type + "'");
  }
  s.finish();
  return p;
}

json point_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

template <class Fn>
void check(Fn&& fn, const std::string& what) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

void SimulationConfig::validate() const {
  if (!(plant_dt > 0.0)) throw ConfigError("simulation.plant_dt must be > 0");
  if (!(measurement_noise >= 0.0)) throw ConfigError("simulation.measurement_noise must be >= 0");
  if (!(abort_error > 0.0)) throw ConfigError("simulation.abort_error must be > 0");
  if (!(timeout_factor >= 1.0)) throw ConfigError("simulation.timeout_factor must be >= 1");
  if (!(resync_threshold > 0.0)) throw ConfigError("simulation.resync_threshold must be > 0");
  if (trajectory_samples < kMinTrajectorySamples) {
    throw ConfigError("simulation.trajectory_samples must be >= " +
                      std::to_string(kMinTrajectorySamples));
  }
}

void OptimizerConfig::validate() const {
  if (control_points < 5) throw ConfigError("optimizer.control_points must be >= 5");
  if (initial_evaluations < 1) throw ConfigError("optimizer.initial_evaluations must be >= 1");
  if (iterations_per_lap < 1) throw ConfigError("optimizer.iterations_per_lap must be >= 1");
  if (!(sigma0 > 0.0)) throw ConfigError("optimizer.sigma0 must be > 0");
  if (population < 0) throw ConfigError("optimizer.population must be >= 0");
  if (threads < 1) throw ConfigError("optimizer.threads must be >= 1");
  if (!(position_scale >= 0.0)) throw ConfigError("optimizer.position_scale must be >= 0");
}

void ExperimentConfig::validate() const {
  if (laps < 1) throw ConfigError("laps must be >= 1");
  if (track_file.empty() && builtin_track.empty()) throw ConfigError("track is required");
  if (!(headroom > 0.0)) throw ConfigError("vehicle.headroom must be > 0");
  if (feedback_from_lap < 1) throw ConfigError("feedback.from_lap must be >= 1");
  if (!(map_resolution > 0.0)) throw ConfigError("map.resolution must be > 0");
  if (!(map_margin >= 0.0)) throw ConfigError("map.margin must be >= 0");
  check([&] { friction.validate(); }, "friction");
  check([&] { limits.validate(); }, "limits");
  check([&] { vehicle.validate(); }, "vehicle");
  check([&] { feedback.validate(); }, "feedback");
  check([&] { map.validate(); }, "map");
  check([&] { mpc.validate(); }, "mpc");
  check([&] { objective.validate(); }, "objective");
  optimizer.validate();
  simulation.validate();
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section r(root, "");
  r.get("name", c.name);
  r.get("laps", c.laps);
  r.get("seed", c.seed);
  r.get("out", c.out_dir);

  if (const json* j = r.child("track")) {
    Section s(*j, "track");
    s.get("file", c.track_file);
    s.get("builtin", c.builtin_track);
    s.finish();
    if (!c.track_file.empty() && !base_dir.empty() &&
        std::filesystem::path(c.track_file).is_relative()) {
      c.track_file = (std::filesystem::path(base_dir) / c.track_file).lexically_normal().string();
    }
  }
  if (const json* j = r.child("friction")) {
    Section s(*j, "friction");
    s.get("global_scale", c.friction.global_scale);
    if (const json* patches = s.child("patches")) {
      if (!patches->is_array()) throw ConfigError("friction.patches must be an array");
      for (std::size_t i = 0; i < patches->size(); ++i) {
        c.friction.patches.push_back(
            read_patch((*patches)[i], "friction.patches[" + std::to_string(i) + "]"));
      }
    }
    s.finish();
  }
  if (const json* j = r.child("limits")) {
    Section s(*j, "limits");
    s.get("v_max", c.limits.v_max);
    s.get("a_par", c.limits.a_par_nominal);
    s.get("a_perp", c.limits.a_perp_nominal);
    s.finish();
  }
  bool explicit_par = false;
  bool explicit_perp = false;
  if (const json* j = r.child("vehicle")) {
    Section s(*j, "vehicle");
    s.get("wheelbase", c.vehicle.wheelbase);
    s.get("max_steer", c.vehicle.max_steer);
    s.get("max_steer_rate", c.vehicle.max_steer_rate);
    s.get("max_accel", c.vehicle.max_accel);
    s.get("headroom", c.headroom);
    explicit_par = s.get("a_par_physical", c.vehicle.a_par_physical);
    explicit_perp = s.get("a_perp_physical", c.vehicle.a_perp_physical);
    s.finish();
  }
  if (!explicit_par) c.vehicle.a_par_physical = c.headroom * c.limits.a_par_nominal;
  if (!explicit_perp) c.vehicle.a_perp_physical = c.headroom * c.limits.a_perp_nominal;

  if (const json* j = r.child("feedback")) {
    Section s(*j, "feedback");
    s.get("enabled", c.feedback_enabled);
    s.get("from_lap", c.feedback_from_lap);
    s.get("e_th", c.feedback.e_th);
    s.get("w_plus", c.feedback.w_plus);
    s.get("w_minus", c.feedback.w_minus);
    s.get("blame_radius", c.feedback.blame_radius);
    s.get("report_fraction", c.feedback.report_fraction);
    s.get("deadband_fraction", c.feedback.deadband_fraction);
    s.finish();
  }
  if (const json* j = r.child("map")) {
    Section s(*j, "map");
    s.get("resolution", c.map_resolution);
    s.get("margin", c.map_margin);
    s.get("m_init", c.map.m_init);
    s.get("v_init", c.map.v_init);
    s.get("r", c.map.r);
    s.get("q", c.map.q);
    s.get("m_min", c.map.m_min);
    s.get("m_max", c.map.m_max);
    s.finish();
  }
  if (const json* j = r.child("mpc")) {
    Section s(*j, "mpc");
    s.get("horizon", c.mpc.horizon);
    s.get("dt", c.mpc.dt);
    s.get("w_position", c.mpc.w_position);
    s.get("w_heading", c.mpc.w_heading);
    s.get("w_speed", c.mpc.w_speed);
    s.get("w_accel", c.mpc.w_accel);
    s.get("w_steer_rate", c.mpc.w_steer_rate);
    s.get("terminal_scale", c.mpc.terminal_scale);
    s.get("w_steer_limit", c.mpc.w_steer_limit);
    s.get("max_iterations", c.mpc.max_iterations);
    s.finish();
  }
  c.mpc = with_vehicle(c.mpc, c.vehicle);

  bool explicit_kappa = false;
  if (const json* j = r.child("objective")) {
    Section s(*j, "objective");
    s.get("lambda_dist", c.objective.lambda_dist);
    s.get("lambda_curv", c.objective.lambda_curv);
    explicit_kappa = s.get("kappa_max", c.objective.kappa_max);
    s.get("penalty_samples", c.objective.penalty_samples);
    s.get("lap_time_samples", c.objective.lap_time_samples);
    s.get("degenerate_cost", c.objective.degenerate_cost);
    s.finish();
  }
  if (!explicit_kappa) c.objective.kappa_max = max_curvature(c.vehicle);

  if (const json* j = r.child("optimizer")) {
    Section s(*j, "optimizer");
    s.get("control_points", c.optimizer.control_points);
    s.get("initial_evaluations", c.optimizer.initial_evaluations);
    s.get("iterations_per_lap", c.optimizer.iterations_per_lap);
    s.get("sigma0", c.optimizer.sigma0);
    s.get("population", c.optimizer.population);
    s.get("threads", c.optimizer.threads);
    s.get("position_scale", c.optimizer.position_scale);
    s.finish();
  }
  if (const json* j = r.child("simulation")) {
    Section s(*j, "simulation");
    s.get("plant_dt", c.simulation.plant_dt);
    s.get("measurement_noise", c.simulation.measurement_noise);
    s.get("abort_error", c.simulation.abort_error);
    s.get("timeout_factor", c.simulation.timeout_factor);
    s.get("resync_threshold", c.simulation.resync_threshold);
    s.get("trajectory_samples", c.simulation.trajectory_samples);
    s.finish();
  }
  r.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str(), std::filesystem::path(path).parent_path().string());
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["laps"] = c.laps;
  j["seed"] = c.seed;
  j["out"] = c.out_dir;
  j["track"] = json::object();
  if (!c.track_file.empty()) j["track"]["file"] = c.track_file;
  if (!c.builtin_track.empty()) j["track"]["builtin"] = c.builtin_track;
  json patches = json::array();
  for (const FrictionPatch& p : c.friction.patches) {
    json pj;
    pj["scale"] = p.scale;
    if (p.shape == FrictionPatch::Shape::kCircle) {
      pj["type"] = "circle";
      pj["center"] = point_json(p.center);
      pj["radius"] = p.radius;
    } else {
      pj["type"] = "polygon";
      pj["points"] = json::array();
      for (const Vec2& q : p.polygon) pj["points"].push_back(point_json(q));
    }
    patches.push_back(pj);
  }
  j["friction"] = {{"global_scale", c.friction.global_scale}, {"patches", patches}};
  j["limits"] = {{"v_max", c.limits.v_max},
                 {"a_par", c.limits.a_par_nominal},
                 {"a_perp", c.limits.a_perp_nominal}};
  j["vehicle"] = {{"wheelbase", c.vehicle.wheelbase},
                  {"max_steer", c.vehicle.max_steer},
                  {"max_steer_rate", c.vehicle.max_steer_rate},
                  {"max_accel", c.vehicle.max_accel},
                  {"headroom", c.headroom},
                  {"a_par_physical", c.vehicle.a_par_physical},
                  {"a_perp_physical", c.vehicle.a_perp_physical}};
  j["feedback"] = {{"enabled", c.feedback_enabled},
                   {"from_lap", c.feedback_from_lap},
                   {"e_th", c.feedback.e_th},
                   {"w_plus", c.feedback.w_plus},
                   {"w_minus", c.feedback.w_minus},
                   {"blame_radius", c.feedback.blame_radius},
                   {"report_fraction", c.feedback.report_fraction},
                   {"deadband_fraction", c.feedback.deadband_fraction}};
  j["map"] = {{"resolution", c.map_resolution}, {"margin", c.map_margin},
              {"m_init", c.map.m_init},         {"v_init", c.map.v_init},
              {"r", c.map.r},                   {"q", c.map.q},
              {"m_min", c.map.m_min},           {"m_max", c.map.m_max}};
  j["mpc"] = {{"horizon", c.mpc.horizon},
              {"dt", c.mpc.dt},
              {"w_position", c.mpc.w_position},
              {"w_heading", c.mpc.w_heading},
              {"w_speed", c.mpc.w_speed},
              {"w_accel", c.mpc.w_accel},
              {"w_steer_rate", c.mpc.w_steer_rate},
              {"terminal_scale", c.mpc.terminal_scale},
              {"w_steer_limit", c.mpc.w_steer_limit},
              {"max_iterations", c.mpc.max_iterations}};
  j["objective"] = {{"lambda_dist", c.objective.lambda_dist},
                    {"lambda_curv", c.objective.lambda_curv},
                    {"kappa_max", c.objective.kappa_max},
                    {"penalty_samples", c.objective.penalty_samples},
                    {"lap_time_samples", c.objective.lap_time_samples},
                    {"degenerate_cost", c.objective.degenerate_cost}};
  j["optimizer"] = {{"control_points", c.optimizer.control_points},
                    {"initial_evaluations", c.optimizer.initial_evaluations},
                    {"iterations_per_lap", c.optimizer.iterations_per_lap},
                    {"sigma0", c.optimizer.sigma0},
                    {"population", c.optimizer.population},
                    {"threads", c.optimizer.threads},
                    {"position_scale", c.optimizer.position_scale}};
  j["simulation"] = {{"plant_dt", c.simulation.plant_dt},
                     {"measurement_noise", c.simulation.measurement_noise},
                     {"abort_error", c.simulation.abort_error},
                     {"timeout_factor", c.simulation.timeout_factor},
                     {"resync_threshold", c.simulation.resync_threshold},
                     {"trajectory_samples", c.simulation.trajectory_samples}};
  return j.dump(2) + "\n";
}

}  // namespace raceline
