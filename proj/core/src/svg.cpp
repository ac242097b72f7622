#include "raceline/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "raceline/closed_loop.hpp"

namespace raceline {

namespace {

std::string hex(int r, int g, int b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

class Frame {
 public:
  Frame(const BoundingBox& box, double ppm) : box_(box), ppm_(ppm) {}
  double x(double wx) const { return (wx - box_.min.x()) * ppm_; }
  double y(double wy) const { return (box_.max.y() - wy) * ppm_; }
  double width() const { return (box_.max.x() - box_.min.x()) * ppm_; }
  double height() const { return (box_.max.y() - box_.min.y()) * ppm_; }
  double scale() const { return ppm_; }

 private:
  BoundingBox box_;
  double ppm_;
};

std::string points_attr(const std::vector<Vec2>& pts, const Frame& f) {
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) os << ' ';
    os << f.x(pts[i].x()) << ',' << f.y(pts[i].y());
  }
  return os.str();
}

}  // namespace

std::string map_cell_color(double m, const MapParams& params) {
  if (m < 1.0) {
    const double t = std::clamp((1.0 - m) / std::max(1.0 - params.m_min, 1e-12), 0.0, 1.0);
    const int c = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    return hex(c, c, 255);
  }
  if (m > 1.0) {
    const double t = std::clamp((m - 1.0) / std::max(params.m_max - 1.0, 1e-12), 0.0, 1.0);
    const int c = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    return hex(255, c, c);
  }
  return hex(255, 255, 255);
}

std::string render_svg(const TrackModel& track, const TimedTrajectory& trajectory,
                       const ConstraintMap& map, const LapLog* log,
                       const std::vector<BlameRegion>& regions, double deadband,
                       double pixels_per_meter) {
  BoundingBox box = map.extent();
  if (track.size() > 0) {
    const BoundingBox tb = track.bounds();
    box.min = box.min.cwiseMin(tb.min);
    box.max = box.max.cwiseMax(tb.max);
  }
  const Frame f(box, pixels_per_meter);
  std::ostringstream os;
  os.precision(6);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width() << "\" height=\""
     << f.height() << "\" viewBox=\"0 0 " << f.width() << ' ' << f.height() << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  os << "<g id=\"map\" fill-opacity=\"0.7\">\n";
  const double res = map.resolution();
  for (int ix = 0; ix < map.nx(); ++ix) {
    for (int iy = 0; iy < map.ny(); ++iy) {
      const double m = map.m(ix, iy);
      const double wx = map.origin().x() + ix * res;
      const double wy = map.origin().y() + (iy + 1) * res;
      os << "<rect x=\"" << f.x(wx) << "\" y=\"" << f.y(wy) << "\" width=\"" << res * f.scale()
         << "\" height=\"" << res * f.scale() << "\" fill=\"" << map_cell_color(m, map.params())
         << "\" data-ix=\"" << ix << "\" data-iy=\"" << iy << "\" data-m=\"" << m << "\"/>\n";
    }
  }
  os << "</g>\n";

  os << "<g id=\"track\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\">\n";
  if (track.size() > 0) {
    os << "<polygon points=\"" << points_attr(track.left_boundary(), f) << "\"/>\n";
    os << "<polygon points=\"" << points_attr(track.right_boundary(), f) << "\"/>\n";
  }
  os << "</g>\n";

  os << "<g id=\"planned\" stroke-width=\"2.5\" stroke-linecap=\"round\">\n";
  const int n = trajectory.size();
  for (int i = 0; i < n; ++i) {
    const TrajectorySample& a = trajectory.samples[i];
    const TrajectorySample& b = trajectory.samples[(i + 1) % n];
    const char* color = a.a_par > deadband ? "#d62728" : a.a_par < -deadband ? "#1f77b4" : "#7f7f7f";
    os << "<line x1=\"" << f.x(a.position.x()) << "\" y1=\"" << f.y(a.position.y()) << "\" x2=\""
       << f.x(b.position.x()) << "\" y2=\"" << f.y(b.position.y()) << "\" stroke=\"" << color
       << "\"/>\n";
  }
  os << "</g>\n";

  os << "<g id=\"executed\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\">\n";
  if (log && !log->rows.empty()) {
    std::vector<Vec2> path;
    path.reserve(log->rows.size());
    for (const LapLogRow& r : log->rows) path.push_back(r.state.position());
    os << "<polyline points=\"" << points_attr(path, f) << "\"/>\n";
  }
  os << "</g>\n";

  os << "<g id=\"blame\" fill=\"none\" stroke-width=\"6\" stroke-opacity=\"0.45\">\n";
  for (const BlameRegion& r : regions) {
    os << "<polyline stroke=\"" << (r.error < 0.0 ? "#0000ff" : "#ff0000") << "\" points=\""
       << points_attr(r.positions, f) << "\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace raceline
