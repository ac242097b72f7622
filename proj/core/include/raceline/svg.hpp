#pragma once

#include <string>
#include <vector>

#include "raceline/blame.hpp"
#include "raceline/constraint_map.hpp"
#include "raceline/time_parameterization.hpp"
#include "raceline/track.hpp"

namespace raceline {

struct LapLog;

/// "#rrggbb" for a scale factor: white at 1, shading to blue towards m_min
/// and to red towards m_max.
std::string map_cell_color(double m, const MapParams& params);

/// Stand-alone SVG with layers (group ids): "map", "track", "planned",
/// "executed", "blame". Map cells carry data-ix, data-iy and data-m; planned
/// segments are colored by acceleration sign (red accelerate, blue brake,
/// gray neutral within deadband). A null or empty log renders the plan only.
std::string render_svg(const TrackModel& track, const TimedTrajectory& trajectory,
                       const ConstraintMap& map, const LapLog* log,
                       const std::vector<BlameRegion>& regions, double deadband,
                       double pixels_per_meter = 40.0);

}  // namespace raceline
