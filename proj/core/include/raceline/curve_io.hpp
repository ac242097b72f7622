#pragma once

#include <iosfwd>
#include <string>

#include "raceline/nurbs.hpp"

namespace raceline {

/// Text record {degree, control_points, weights, knots}; doubles are written
/// with 17 significant digits so read_curve(write_curve(c)) is bit-exact.
void write_curve(std::ostream& os, const NurbsCurve& curve);
NurbsCurve read_curve(std::istream& is);

void save_curve(const std::string& path, const NurbsCurve& curve);
NurbsCurve load_curve(const std::string& path);

/// "%.17g" formatting shared by all text artifacts.
std::string format_double(double value);

}  // namespace raceline
