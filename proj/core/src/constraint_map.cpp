#include "raceline/constraint_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "raceline/curve_io.hpp"
#include "raceline/errors.hpp"

namespace raceline {

void MapParams::validate() const {
  if (!(v_init > 0.0) || !(r > 0.0) || !(q >= 0.0)) {
    throw ConfigError("map: V_init and R must be positive, Q nonnegative");
  }
  if (!(m_min > 0.0) || !(m_max >= m_min)) {
    throw ConfigError("map: need 0 < M_min <= M_max");
  }
}

void FeedbackConfig::validate() const {
  if (!(e_th > 0.0)) throw ConfigError("feedback: e_th must be positive");
  if (!(w_plus >= 0.0) || !(w_minus <= 0.0)) {
    throw ConfigError("feedback: need w_plus >= 0 and w_minus <= 0");
  }
  if (!(blame_radius > 0.0)) throw ConfigError("feedback: blame_radius must be positive");
  if (!(report_fraction >= 0.0) || !(deadband_fraction >= 0.0)) {
    throw ConfigError("feedback: fractions must be nonnegative");
  }
}

ConstraintMap::ConstraintMap(Vec2 origin, double resolution, int nx, int ny,
                             MapParams params)
    : origin_(std::move(origin)),
      resolution_(resolution),
      nx_(nx),
      ny_(ny),
      params_(params) {
  params_.validate();
  if (!(resolution > 0.0) || nx < 1 || ny < 1) {
    throw ConfigError("map: resolution must be positive and grid nonempty");
  }
  const double m0 = std::clamp(params_.m_init, params_.m_min, params_.m_max);
  m_.assign(static_cast<std::size_t>(nx) * ny, m0);
  v_.assign(static_cast<std::size_t>(nx) * ny, params_.v_init);
}

ConstraintMap ConstraintMap::covering(const BoundingBox& box, double resolution,
                                      MapParams params) {
  if (!(resolution > 0.0)) throw ConfigError("map: resolution must be positive");
  const Vec2 size = box.max - box.min;
  const int nx = std::max(1, static_cast<int>(std::ceil(size.x() / resolution)));
  const int ny = std::max(1, static_cast<int>(std::ceil(size.y() / resolution)));
  return ConstraintMap(box.min, resolution, nx, ny, params);
}

BoundingBox ConstraintMap::extent() const {
  return {origin_, origin_ + Vec2(nx_ * resolution_, ny_ * resolution_)};
}

std::size_t ConstraintMap::index(int ix, int iy) const {
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) {
    throw OutOfExtentError("map cell index out of range",
                           std::numeric_limits<double>::quiet_NaN());
  }
  return static_cast<std::size_t>(iy) * nx_ + ix;
}

void ConstraintMap::set_m(int ix, int iy, double value) {
  m_[index(ix, iy)] = std::clamp(value, params_.m_min, params_.m_max);
}

void ConstraintMap::set_v(int ix, int iy, double value) {
  if (!(value > 0.0)) throw std::invalid_argument("map variance must be positive");
  v_[index(ix, iy)] = value;
}

void ConstraintMap::fill_m(double value) {
  std::fill(m_.begin(), m_.end(), std::clamp(value, params_.m_min, params_.m_max));
}

Vec2 ConstraintMap::cell_center(int ix, int iy) const {
  return origin_ + resolution_ * Vec2(ix + 0.5, iy + 0.5);
}

std::pair<int, int> ConstraintMap::cell_of(const Vec2& p) const {
  if (!contains(p)) {
    throw OutOfExtentError("position outside constraint map",
                           std::numeric_limits<double>::quiet_NaN());
  }
  const Vec2 g = (p - origin_) / resolution_;
  return {std::min(static_cast<int>(g.x()), nx_ - 1),
          std::min(static_cast<int>(g.y()), ny_ - 1)};
}

double ConstraintMap::scale(const Vec2& p) const {
  if (!contains(p)) {
    throw OutOfExtentError("position outside constraint map",
                           std::numeric_limits<double>::quiet_NaN());
  }
  auto axis = [](double g, int count, int& i0, double& t) {
    g = std::clamp(g - 0.5, 0.0, static_cast<double>(count - 1));
    if (count == 1) {
      i0 = 0;
      t = 0.0;
      return;
    }
    i0 = std::min(static_cast<int>(g), count - 2);
    t = g - i0;
  };
  int ix = 0;
  int iy = 0;
  double tx = 0.0;
  double ty = 0.0;
  axis((p.x() - origin_.x()) / resolution_, nx_, ix, tx);
  axis((p.y() - origin_.y()) / resolution_, ny_, iy, ty);
  const int ix1 = std::min(ix + 1, nx_ - 1);
  const int iy1 = std::min(iy + 1, ny_ - 1);
  const double m00 = m_[static_cast<std::size_t>(iy) * nx_ + ix];
  const double m10 = m_[static_cast<std::size_t>(iy) * nx_ + ix1];
  const double m01 = m_[static_cast<std::size_t>(iy1) * nx_ + ix];
  const double m11 = m_[static_cast<std::size_t>(iy1) * nx_ + ix1];
  return (1.0 - ty) * ((1.0 - tx) * m00 + tx * m10) + ty * ((1.0 - tx) * m01 + tx * m11);
}

bool ConstraintMap::operator==(const ConstraintMap& other) const {
  return origin_ == other.origin_ && resolution_ == other.resolution_ &&
         nx_ == other.nx_ && ny_ == other.ny_ && m_ == other.m_ && v_ == other.v_ &&
         params_.r == other.params_.r && params_.q == other.params_.q &&
         params_.m_min == other.params_.m_min && params_.m_max == other.params_.m_max;
}

AccelLimits scale_at(const ConstraintMap& map, const Vec2& position,
                     double a_par_nominal, double a_perp_nominal) {
  const double m = map.scale(position);
  return {m * a_par_nominal, m * a_perp_nominal};
}

double modulate_error(double e_hat, const FeedbackConfig& cfg) {
  return e_hat < cfg.e_th ? cfg.w_plus * e_hat : cfg.w_minus * e_hat;
}

CellUpdate kalman_update_cell(double m, double v, double e, double r, double q,
                              double m_min, double m_max) {
  const double gain = v / (v + r);
  return {std::clamp(m + gain * e, m_min, m_max), (1.0 - gain) * v + q, gain};
}

double steady_state_variance(double r, double q) {
  // V = V R / (V + R) + Q  <=>  V^2 - Q V - Q R = 0
  return 0.5 * (q + std::sqrt(q * q + 4.0 * q * r));
}

int apply_blame(ConstraintMap& map, std::span<const BlamePoint> points, double radius) {
  if (points.empty()) return 0;
  const int nx = map.nx();
  const int ny = map.ny();
  const double res = map.resolution();
  const double r2 = radius * radius;
  std::vector<double> best_d2(static_cast<std::size_t>(nx) * ny,
                              std::numeric_limits<double>::infinity());
  std::vector<int> best_point(best_d2.size(), -1);

  for (int k = 0; k < static_cast<int>(points.size()); ++k) {
    const Vec2 g = (points[k].position - map.origin()) / res;
    const int reach = static_cast<int>(std::ceil(radius / res)) + 1;
    const int cx = static_cast<int>(std::floor(g.x()));
    const int cy = static_cast<int>(std::floor(g.y()));
    for (int iy = std::max(0, cy - reach); iy <= std::min(ny - 1, cy + reach); ++iy) {
      for (int ix = std::max(0, cx - reach); ix <= std::min(nx - 1, cx + reach); ++ix) {
        const double d2 = (map.cell_center(ix, iy) - points[k].position).squaredNorm();
        const std::size_t idx = static_cast<std::size_t>(iy) * nx + ix;
        if (d2 <= r2 && d2 < best_d2[idx]) {
          best_d2[idx] = d2;
          best_point[idx] = k;
        }
      }
    }
  }

  const MapParams& p = map.params();
  int updated = 0;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const int k = best_point[static_cast<std::size_t>(iy) * nx + ix];
      if (k < 0) continue;
      const CellUpdate u = kalman_update_cell(map.m(ix, iy), map.v(ix, iy),
                                              points[k].error, p.r, p.q, p.m_min, p.m_max);
      map.set_m(ix, iy, u.m);
      map.set_v(ix, iy, u.v);
      ++updated;
    }
  }
  return updated;
}

void write_map(std::ostream& os, const ConstraintMap& map) {
  const BoundingBox box = map.extent();
  const MapParams& p = map.params();
  os << "constraint_map 1\n";
  os << "extent " << format_double(box.min.x()) << ' ' << format_double(box.min.y()) << ' '
     << format_double(box.max.x()) << ' ' << format_double(box.max.y()) << "\n";
  os << "resolution " << format_double(map.resolution()) << "\n";
  os << "size " << map.nx() << ' ' << map.ny() << "\n";
  os << "noise " << format_double(p.r) << ' ' << format_double(p.q) << "\n";
  os << "clamp " << format_double(p.m_min) << ' ' << format_double(p.m_max) << "\n";
  os << "init " << format_double(p.m_init) << ' ' << format_double(p.v_init) << "\n";
  for (int iy = 0; iy < map.ny(); ++iy) {
    for (int ix = 0; ix < map.nx(); ++ix) {
      os << ix << ' ' << iy << ' ' << format_double(map.m(ix, iy)) << ' '
         << format_double(map.v(ix, iy)) << "\n";
    }
  }
}

namespace {

double read_number(std::istream& is) {
  std::string token;
  if (!(is >> token)) throw std::runtime_error("map file: unexpected end of input");
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw std::runtime_error("map file: bad number '" + token + "'");
  }
  return value;
}

void read_keyword(std::istream& is, const char* keyword) {
  std::string token;
  if (!(is >> token) || token != keyword) {
    throw std::runtime_error(std::string("map file: expected '") + keyword + "'");
  }
}

}  // namespace

ConstraintMap read_map(std::istream& is) {
  read_keyword(is, "constraint_map");
  if (read_number(is) != 1.0) throw std::runtime_error("map file: unsupported version");
  read_keyword(is, "extent");
  const double lo_x = read_number(is);
  const double lo_y = read_number(is);
  const Vec2 lo(lo_x, lo_y);
  read_number(is);
  read_number(is);
  read_keyword(is, "resolution");
  const double res = read_number(is);
  read_keyword(is, "size");
  const int nx = static_cast<int>(read_number(is));
  const int ny = static_cast<int>(read_number(is));
  MapParams p;
  read_keyword(is, "noise");
  p.r = read_number(is);
  p.q = read_number(is);
  read_keyword(is, "clamp");
  p.m_min = read_number(is);
  p.m_max = read_number(is);
  read_keyword(is, "init");
  p.m_init = read_number(is);
  p.v_init = read_number(is);
  ConstraintMap map(lo, res, nx, ny, p);
  for (long long k = 0; k < static_cast<long long>(nx) * ny; ++k) {
    const int ix = static_cast<int>(read_number(is));
    const int iy = static_cast<int>(read_number(is));
    const double m = read_number(is);
    const double v = read_number(is);
    map.set_m(ix, iy, m);
    map.set_v(ix, iy, v);
  }
  return map;
}

void save_map(const std::string& path, const ConstraintMap& map) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_map(os, map);
}

ConstraintMap load_map(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_map(is);
}

}  // namespace raceline
