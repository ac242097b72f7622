#include "raceline/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "raceline/curve_io.hpp"
#include "raceline/errors.hpp"

namespace raceline {

TrackModel::TrackModel(std::vector<Vec2> centerline, std::vector<double> w_left,
                       std::vector<double> w_right)
    : centerline_(std::move(centerline)),
      w_left_(std::move(w_left)),
      w_right_(std::move(w_right)) {
  if (centerline_.size() != w_left_.size() || centerline_.size() != w_right_.size()) {
    throw std::invalid_argument("track: width count must match centerline");
  }
  if (centerline_.size() >= 2 &&
      (centerline_.front() - centerline_.back()).norm() < 1e-9) {
    centerline_.pop_back();
    w_left_.pop_back();
    w_right_.pop_back();
  }
  if (centerline_.size() < 3) throw std::invalid_argument("track: need >= 3 points");
  for (std::size_t i = 0; i < centerline_.size(); ++i) {
    if (!(w_left_[i] > 0.0) || !(w_right_[i] > 0.0)) {
      throw std::invalid_argument("track: widths must be positive");
    }
  }
  const int n = size();
  arc_length_.assign(n, 0.0);
  for (int i = 1; i < n; ++i) {
    arc_length_[i] = arc_length_[i - 1] + (centerline_[i] - centerline_[i - 1]).norm();
  }
  length_ = arc_length_.back() + (centerline_.front() - centerline_.back()).norm();
  normals_.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 tangent = (centerline_[(i + 1) % n] - centerline_[(i + n - 1) % n]).normalized();
    normals_[i] = Vec2(-tangent.y(), tangent.x());
  }
}

TrackModel::Projection TrackModel::project(const Vec2& p) const {
  const int n = size();
  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = centerline_[i];
    const Vec2 seg = centerline_[(i + 1) % n] - a;
    const double len2 = seg.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(seg) / len2, 0.0, 1.0) : 0.0;
    const double d2 = (a + t * seg - p).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best.segment = i;
      best.t = t;
    }
  }
  const int i = best.segment;
  const int j = (i + 1) % n;
  const Vec2 seg = centerline_[j] - centerline_[i];
  const Vec2 foot = centerline_[i] + best.t * seg;
  const double cross = seg.x() * (p - foot).y() - seg.y() * (p - foot).x();
  const double dist = std::sqrt(best_d2);
  best.lateral = cross >= 0.0 ? dist : -dist;
  best.s = arc_length_[i] + best.t * std::sqrt(seg.squaredNorm());
  const double wl = (1.0 - best.t) * w_left_[i] + best.t * w_left_[j];
  const double wr = (1.0 - best.t) * w_right_[i] + best.t * w_right_[j];
  best.half_width = best.lateral >= 0.0 ? wl : wr;
  return best;
}

double TrackModel::boundary_excess(const Vec2& p) const {
  const Projection proj = project(p);
  return std::max(0.0, std::abs(proj.lateral) - proj.half_width);
}

std::vector<Vec2> TrackModel::left_boundary() const {
  std::vector<Vec2> out(size());
  for (int i = 0; i < size(); ++i) out[i] = centerline_[i] + w_left_[i] * normals_[i];
  return out;
}

std::vector<Vec2> TrackModel::right_boundary() const {
  std::vector<Vec2> out(size());
  for (int i = 0; i < size(); ++i) out[i] = centerline_[i] - w_right_[i] * normals_[i];
  return out;
}

BoundingBox TrackModel::bounds() const {
  BoundingBox box{Vec2::Constant(std::numeric_limits<double>::infinity()),
                  Vec2::Constant(-std::numeric_limits<double>::infinity())};
  for (const auto& side : {left_boundary(), right_boundary(), centerline_}) {
    for (const Vec2& p : side) {
      box.min = box.min.cwiseMin(p);
      box.max = box.max.cwiseMax(p);
    }
  }
  return box;
}

TrackModel read_track_csv(std::istream& is) {
  std::vector<Vec2> points;
  std::vector<double> wl;
  std::vector<double> wr;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0;
    double y = 0;
    double l = 0;
    double r = 0;
    if (!(row >> x >> y >> l >> r)) {
      if (points.empty()) continue;  // header
      throw std::runtime_error("track csv: malformed row '" + line + "'");
    }
    points.emplace_back(x, y);
    wl.push_back(l);
    wr.push_back(r);
  }
  return TrackModel(std::move(points), std::move(wl), std::move(wr));
}

TrackModel load_track_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read track file " + path);
  return read_track_csv(is);
}

void write_track_csv(std::ostream& os, const TrackModel& track) {
  os << "x,y,w_left,w_right\n";
  for (int i = 0; i < track.size(); ++i) {
    os << format_double(track.centerline()[i].x()) << ','
       << format_double(track.centerline()[i].y()) << ','
       << format_double(track.w_left()[i]) << ',' << format_double(track.w_right()[i])
       << "\n";
  }
}

void save_track_csv(const std::string& path, const TrackModel& track) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_track_csv(os, track);
}

TrackModel make_oval_track(double straight, double radius, double half_width,
                           double spacing) {
  const double pi = std::numbers::pi;
  const double perimeter = 2.0 * straight + 2.0 * pi * radius;
  const int n = std::max(16, static_cast<int>(std::round(perimeter / spacing)));
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    // Start at the middle of the bottom straight, heading +x.
    double s = std::fmod(perimeter * i / n + 0.5 * straight, perimeter);
    Vec2 p;
    if (s < straight) {
      p = Vec2(-0.5 * straight + s, -radius);
    } else if ((s -= straight) < pi * radius) {
      const double a = -0.5 * pi + s / radius;
      p = Vec2(0.5 * straight + radius * std::cos(a), radius * std::sin(a));
    } else if ((s -= pi * radius) < straight) {
      p = Vec2(0.5 * straight - s, radius);
    } else {
      s -= straight;
      const double a = 0.5 * pi + s / radius;
      p = Vec2(-0.5 * straight + radius * std::cos(a), radius * std::sin(a));
    }
    pts.push_back(p);
  }
  return TrackModel(std::move(pts), std::vector<double>(n, half_width),
                    std::vector<double>(n, half_width));
}

TrackModel make_s_curve_track(double radius, double waist, double half_width,
                              double spacing) {
  // Dense polar sampling, then resample at uniform arc length.
  const int dense = 20000;
  std::vector<Vec2> raw(dense + 1);
  for (int i = 0; i <= dense; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / dense - 0.5 * std::numbers::pi;
    const double r = radius * (1.0 + waist * std::cos(2.0 * phi));
    raw[i] = Vec2(r * std::cos(phi), r * std::sin(phi));
  }
  std::vector<double> s(dense + 1, 0.0);
  for (int i = 1; i <= dense; ++i) s[i] = s[i - 1] + (raw[i] - raw[i - 1]).norm();
  const int n = std::max(16, static_cast<int>(std::round(s.back() / spacing)));
  std::vector<Vec2> pts;
  pts.reserve(n);
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double target = s.back() * i / n;
    while (s[j + 1] < target) ++j;
    const double t = (target - s[j]) / (s[j + 1] - s[j]);
    pts.push_back((1.0 - t) * raw[j] + t * raw[j + 1]);
  }
  return TrackModel(std::move(pts), std::vector<double>(n, half_width),
                    std::vector<double>(n, half_width));
}

TrackModel make_builtin_track(const std::string& name) {
  if (name == "oval") return make_oval_track(8.0, 2.5, 0.8);
  if (name == "s_curve") return make_s_curve_track(5.0, 0.3, 0.8);
  throw ConfigError("unknown builtin track '" + name + "'");
}

}  // namespace raceline
