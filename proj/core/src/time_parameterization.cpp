#include "raceline/time_parameterization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "raceline/curve_io.hpp"
#include "raceline/errors.hpp"

namespace raceline {
namespace {

struct ParametricSample {
  Vec2 position;
  double speed;   // |c'|
  double a_par;   // at T = 1
  double a_perp;  // at T = 1
};

ParametricSample parametric_sample(const NurbsCurve& curve, double u) {
  const auto d = curve.derivatives2(u);
  const double speed = d[1].norm();
  if (speed <= NurbsCurve::kMinSpeed) {
    throw SingularityError("degenerate tangent", u);
  }
  const double cross = d[1].x() * d[2].y() - d[1].y() * d[2].x();
  return {d[0], speed, d[1].dot(d[2]) / speed, cross / speed};
}

void check_samples(int samples) {
  if (samples < 2) throw DomainError("need at least two samples");
}

template <typename LimitFn>
double min_lap_time(const NurbsCurve& curve, const DynamicLimits& limits,
                    int samples, LimitFn&& accel_limits) {
  limits.validate();
  check_samples(samples);
  double t_max = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double u = static_cast<double>(j) / samples;
    const ParametricSample s = parametric_sample(curve, u);
    const AccelLimits a = accel_limits(s.position, u);
    t_max = std::max(t_max, s.speed / limits.v_max);
    t_max = std::max(t_max, std::sqrt(std::abs(s.a_par) / a.a_par_max));
    t_max = std::max(t_max, std::sqrt(std::abs(s.a_perp) / a.a_perp_max));
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw SingularityError("curve has zero length", 0.0);
  }
  return t_max;
}

}  // namespace

void DynamicLimits::validate() const {
  if (!(v_max > 0.0) || !(a_par_nominal > 0.0) || !(a_perp_nominal > 0.0)) {
    throw ConfigError("dynamic limits must be strictly positive");
  }
}

Kinematics kinematics_at(const NurbsCurve& curve, double u, double lap_time) {
  if (!(lap_time > 0.0)) throw DomainError("lap time must be positive");
  const ParametricSample s = parametric_sample(curve, u);
  const double t2 = lap_time * lap_time;
  return {s.speed / lap_time, s.a_par / t2, s.a_perp / t2};
}

double min_lap_time_const(const NurbsCurve& curve, const DynamicLimits& limits,
                          int samples) {
  const AccelLimits a{limits.a_par_nominal, limits.a_perp_nominal};
  return min_lap_time(curve, limits, samples,
                      [&](const Vec2&, double) { return a; });
}

double min_lap_time_spatial(const NurbsCurve& curve, const DynamicLimits& limits,
                            const ConstraintMap& map, int samples) {
  return min_lap_time(curve, limits, samples, [&](const Vec2& p, double u) {
    if (!map.contains(p)) {
      throw OutOfExtentError("curve leaves the constraint map at u=" + std::to_string(u), u);
    }
    return scale_at(map, p, limits.a_par_nominal, limits.a_perp_nominal);
  });
}

TimedTrajectory sample_trajectory(std::shared_ptr<const NurbsCurve> curve,
                                  double lap_time, int samples) {
  if (!curve) throw std::invalid_argument("null curve");
  if (!(lap_time > 0.0)) throw DomainError("lap time must be positive");
  check_samples(samples);
  TimedTrajectory out;
  out.lap_time = lap_time;
  out.samples.resize(samples);
  const double t2 = lap_time * lap_time;
  for (int j = 0; j < samples; ++j) {
    const double u = static_cast<double>(j) / samples;
    const auto d = curve->derivatives2(u);
    const double speed = d[1].norm();
    if (speed <= NurbsCurve::kMinSpeed) throw SingularityError("degenerate tangent", u);
    const double cross = d[1].x() * d[2].y() - d[1].y() * d[2].x();
    TrajectorySample& s = out.samples[j];
    s.u = u;
    s.position = d[0];
    s.heading = std::atan2(d[1].y(), d[1].x());
    s.v = speed / lap_time;
    s.a_par = d[1].dot(d[2]) / speed / t2;
    s.a_perp = cross / speed / t2;
    s.kappa = cross / (speed * speed * speed);
  }
  out.curve = std::move(curve);
  return out;
}

void write_trajectory_csv(std::ostream& os, const TimedTrajectory& trajectory) {
  os << "# T " << format_double(trajectory.lap_time) << " N " << trajectory.size() << "\n";
  os << "u,x,y,v,a_par,a_perp,kappa\n";
  for (const TrajectorySample& s : trajectory.samples) {
    os << format_double(s.u) << ',' << format_double(s.position.x()) << ','
       << format_double(s.position.y()) << ',' << format_double(s.v) << ','
       << format_double(s.a_par) << ',' << format_double(s.a_perp) << ','
       << format_double(s.kappa) << "\n";
  }
}

void save_trajectory_csv(const std::string& path, const TimedTrajectory& trajectory) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_trajectory_csv(os, trajectory);
}

}  // namespace raceline
