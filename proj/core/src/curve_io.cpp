#include "raceline/curve_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace raceline {
namespace {

double parse_double(std::istream& is) {
  std::string token;
  if (!(is >> token)) throw std::runtime_error("curve record: unexpected end of input");
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw std::runtime_error("curve record: bad number '" + token + "'");
  }
  return value;
}

void expect(std::istream& is, const std::string& keyword) {
  std::string token;
  if (!(is >> token) || token != keyword) {
    throw std::runtime_error("curve record: expected '" + keyword + "'");
  }
}

std::size_t parse_count(std::istream& is) {
  long long count = 0;
  if (!(is >> count) || count < 0) throw std::runtime_error("curve record: bad count");
  return static_cast<std::size_t>(count);
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_curve(std::ostream& os, const NurbsCurve& curve) {
  os << "nurbs_curve 1\n";
  os << "degree " << curve.degree() << "\n";
  os << "control_points " << curve.control_points().size() << "\n";
  for (const Vec2& p : curve.control_points()) {
    os << format_double(p.x()) << ' ' << format_double(p.y()) << "\n";
  }
  os << "weights " << curve.weights().size() << "\n";
  for (double w : curve.weights()) os << format_double(w) << "\n";
  os << "knots " << curve.knots().size() << "\n";
  for (double k : curve.knots()) os << format_double(k) << "\n";
}

NurbsCurve read_curve(std::istream& is) {
  expect(is, "nurbs_curve");
  if (parse_count(is) != 1) throw std::runtime_error("curve record: unsupported version");
  expect(is, "degree");
  if (parse_count(is) != static_cast<std::size_t>(NurbsCurve::kDegree)) {
    throw std::runtime_error("curve record: only cubic curves are supported");
  }
  expect(is, "control_points");
  std::vector<Vec2> points(parse_count(is));
  for (Vec2& p : points) {
    p.x() = parse_double(is);
    p.y() = parse_double(is);
  }
  expect(is, "weights");
  std::vector<double> weights(parse_count(is));
  for (double& w : weights) w = parse_double(is);
  expect(is, "knots");
  std::vector<double> knots(parse_count(is));
  for (double& k : knots) k = parse_double(is);
  return NurbsCurve(std::move(points), std::move(weights), std::move(knots));
}

void save_curve(const std::string& path, const NurbsCurve& curve) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_curve(os, curve);
}

NurbsCurve load_curve(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_curve(is);
}

}  // namespace raceline
