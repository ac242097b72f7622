#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "raceline/constraint_map.hpp"
#include "raceline/nurbs.hpp"

namespace raceline {

/// Closed centerline with per-point half-widths to the left and right.
class TrackModel {
 public:
  TrackModel() = default;
  /// A closing duplicate of the first point is dropped. Throws
  /// std::invalid_argument for fewer than 3 points or nonpositive widths.
  TrackModel(std::vector<Vec2> centerline, std::vector<double> w_left,
             std::vector<double> w_right);

  const std::vector<Vec2>& centerline() const { return centerline_; }
  const std::vector<double>& w_left() const { return w_left_; }
  const std::vector<double>& w_right() const { return w_right_; }
  /// Cumulative arc length at each centerline point (first is 0).
  const std::vector<double>& arc_length() const { return arc_length_; }
  double length() const { return length_; }
  int size() const { return static_cast<int>(centerline_.size()); }

  struct Projection {
    int segment = 0;
    double t = 0.0;        ///< position along the segment in [0,1]
    double s = 0.0;        ///< arc length of the foot point
    double lateral = 0.0;  ///< signed distance, positive to the left
    double half_width = 0.0;  ///< width on the side of the point
  };
  Projection project(const Vec2& p) const;

  /// max(0, |lateral| - half_width) in meters.
  double boundary_excess(const Vec2& p) const;

  std::vector<Vec2> left_boundary() const;
  std::vector<Vec2> right_boundary() const;
  /// Box around both boundaries.
  BoundingBox bounds() const;

 private:
  std::vector<Vec2> centerline_;
  std::vector<double> w_left_;
  std::vector<double> w_right_;
  std::vector<double> arc_length_;
  std::vector<Vec2> normals_;
  double length_ = 0.0;
};

/// Rows "x,y,w_left,w_right" (meters); '#' lines and a non-numeric header
/// row are skipped.
TrackModel read_track_csv(std::istream& is);
TrackModel load_track_csv(const std::string& path);
void write_track_csv(std::ostream& os, const TrackModel& track);
void save_track_csv(const std::string& path, const TrackModel& track);

/// Stadium: two straights joined by semicircles, counter-clockwise.
TrackModel make_oval_track(double straight, double radius, double half_width,
                           double spacing = 0.1);

/// Peanut-shaped loop r(phi) = radius (1 + waist cos 2 phi) whose concave
/// waist produces S-bends on both sides.
TrackModel make_s_curve_track(double radius, double waist, double half_width,
                              double spacing = 0.1);

/// Named synthetic tracks: "oval", "s_curve".
TrackModel make_builtin_track(const std::string& name);

}  // namespace raceline
