#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "raceline/nurbs.hpp"

namespace raceline {

struct BoundingBox {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  bool contains(const Vec2& p) const {
    return p.x() >= min.x() && p.y() >= min.y() && p.x() <= max.x() && p.y() <= max.y();
  }
  BoundingBox inflated(double margin) const {
    return {min - Vec2::Constant(margin), max + Vec2::Constant(margin)};
  }
};

/// Per-cell filter constants and initial values.
struct MapParams {
  double m_init = 1.0;
  double v_init = 1.0;
  double r = 0.5;   ///< measurement noise variance
  double q = 0.01;  ///< process noise variance
  double m_min = 0.05;
  double m_max = 2.0;

  void validate() const;
};

/// Error-feedback shaping.
struct FeedbackConfig {
  double e_th = 0.15;           ///< error threshold, meters
  double w_plus = 1.0;          ///< gain below threshold, >= 0
  double w_minus = -2.0;        ///< gain at/above threshold, <= 0
  double blame_radius = 0.5;    ///< meters
  double report_fraction = 0.2; ///< reporting floor as a fraction of e_th
  double deadband_fraction = 0.05;  ///< zone deadband as a fraction of a_par nominal

  void validate() const;
};

struct AccelLimits {
  double a_par_max = 0.0;
  double a_perp_max = 0.0;
};

/// X-by-Y grid of acceleration scale factors M and uncertainties V.
///
/// Cell (ix, iy) covers [origin + ix*res, origin + (ix+1)*res) in x (same in
/// y). Lookups interpolate bilinearly between cell centers and hold the edge
/// value in the outer half cell.
class ConstraintMap {
 public:
  ConstraintMap() = default;
  ConstraintMap(Vec2 origin, double resolution, int nx, int ny, MapParams params);

  /// Smallest grid with the given cell size covering box.
  static ConstraintMap covering(const BoundingBox& box, double resolution,
                                MapParams params);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }
  const MapParams& params() const { return params_; }
  BoundingBox extent() const;
  bool contains(const Vec2& p) const { return extent().contains(p); }

  double m(int ix, int iy) const { return m_[index(ix, iy)]; }
  double v(int ix, int iy) const { return v_[index(ix, iy)]; }
  void set_m(int ix, int iy, double value);
  void set_v(int ix, int iy, double value);
  /// Fills every cell's M (clamped) and leaves V alone.
  void fill_m(double value);
  Vec2 cell_center(int ix, int iy) const;
  /// Cell containing p; throws OutOfExtentError.
  std::pair<int, int> cell_of(const Vec2& p) const;

  /// Interpolated scale factor at p. Throws OutOfExtentError outside extent.
  double scale(const Vec2& p) const;

  std::span<const double> m_values() const { return m_; }
  std::span<const double> v_values() const { return v_; }

  bool operator==(const ConstraintMap& other) const;

 private:
  std::size_t index(int ix, int iy) const;

  Vec2 origin_ = Vec2::Zero();
  double resolution_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  MapParams params_;
  std::vector<double> m_;
  std::vector<double> v_;
};

/// Nominal limits scaled by the interpolated M at position.
AccelLimits scale_at(const ConstraintMap& map, const Vec2& position,
                     double a_par_nominal, double a_perp_nominal);

/// Signed update signal: w_plus * e_hat below e_th, w_minus * e_hat at or
/// above it.
double modulate_error(double e_hat, const FeedbackConfig& cfg);

struct CellUpdate {
  double m = 0.0;
  double v = 0.0;
  double gain = 0.0;
};

/// Scalar Kalman-style update: K = V/(V+R), M+ = M + K e (then clamped),
/// V+ = (1-K) V + Q.
CellUpdate kalman_update_cell(double m, double v, double e, double r, double q,
                              double m_min, double m_max);

/// Fixed point of the uncertainty recursion for constant R, Q.
double steady_state_variance(double r, double q);

struct BlamePoint {
  Vec2 position;
  double error = 0.0;  ///< modulated (signed) error assigned to this point
};

/// Updates every cell whose center is within radius of at least one blame
/// point exactly once, with the error of its nearest point (ties: first
/// point). Returns the number of cells updated.
int apply_blame(ConstraintMap& map, std::span<const BlamePoint> points, double radius);

/// Text grid: header then one "ix iy M V" row per cell, 17 significant
/// digits, bit-exact round trip.
void write_map(std::ostream& os, const ConstraintMap& map);
ConstraintMap read_map(std::istream& is);
void save_map(const std::string& path, const ConstraintMap& map);
ConstraintMap load_map(const std::string& path);

}  // namespace raceline
