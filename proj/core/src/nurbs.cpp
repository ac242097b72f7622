#include "raceline/nurbs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "raceline/errors.hpp"

namespace raceline {
namespace {

constexpr int kP = NurbsCurve::kDegree;
constexpr int kMaxOrder = 8;

void check_parameter(double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw DomainError("curve parameter outside [0,1]: " + std::to_string(u));
  }
}

// Knot span index for u; u == u_{n+1} maps onto the last nonempty span.
int find_span(int n, int degree, double u, std::span<const double> knots) {
  if (u >= knots[n + 1]) return n;
  if (u <= knots[degree]) return degree;
  int low = degree;
  int high = n + 1;
  int mid = (low + high) / 2;
  while (u < knots[mid] || u >= knots[mid + 1]) {
    if (u < knots[mid]) {
      high = mid;
    } else {
      low = mid;
    }
    mid = (low + high) / 2;
  }
  return mid;
}

// Basis functions and their derivatives up to order nd (<= kP) for the fixed
// cubic degree. ders[k][j] is the k-th derivative of N_{span-p+j,p}.
void cubic_basis_derivatives(int span, double u, int nd,
                             std::span<const double> knots,
                             double ders[kP + 1][kP + 1]) {
  double ndu[kP + 1][kP + 1];
  double left[kP + 1];
  double right[kP + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= kP; ++j) {
    left[j] = u - knots[span + 1 - j];
    right[j] = knots[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= kP; ++j) ders[0][j] = ndu[j][kP];

  double a[2][kP + 1];
  for (int r = 0; r <= kP; ++r) {
    int s1 = 0;
    int s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = kP - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : kP - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  double factor = kP;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= kP; ++j) ders[k][j] *= factor;
    factor *= (kP - k);
  }
}

double binomial(int n, int k) {
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

}  // namespace

BasisValues basis_functions(double u, std::span<const double> knots,
                            int degree) {
  check_parameter(u);
  if (degree < 0 || static_cast<int>(knots.size()) < 2 * (degree + 1)) {
    throw std::invalid_argument("knot vector too short for degree");
  }
  const int n = static_cast<int>(knots.size()) - degree - 2;
  BasisValues out;
  out.span = find_span(n, degree, u, knots);
  out.values.assign(degree + 1, 0.0);
  std::vector<double> left(degree + 1);
  std::vector<double> right(degree + 1);
  out.values[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = u - knots[out.span + 1 - j];
    right[j] = knots[out.span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out.values[r] / (right[r + 1] + left[j - r]);
      out.values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out.values[j] = saved;
  }
  return out;
}

NurbsCurve::NurbsCurve(std::vector<Vec2> control_points,
                       std::vector<double> weights, std::vector<double> knots)
    : control_points_(std::move(control_points)),
      weights_(std::move(weights)),
      knots_(std::move(knots)) {
  const auto count = control_points_.size();
  if (count < kP + 1) {
    throw std::invalid_argument("NURBS curve needs at least p+1 control points");
  }
  if (weights_.size() != count) {
    throw std::invalid_argument("weight count must match control point count");
  }
  if (knots_.size() != count + kP + 1) {
    throw std::invalid_argument("knot count must equal n + p + 2");
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("NURBS weights must be strictly positive");
    }
  }
  for (const Vec2& p : control_points_) {
    if (!p.allFinite()) throw std::invalid_argument("non-finite control point");
  }
  for (int i = 0; i <= kP; ++i) {
    if (knots_[i] != 0.0 || knots_[knots_.size() - 1 - i] != 1.0) {
      throw std::invalid_argument("knot vector must be clamped on [0,1]");
    }
  }
  for (std::size_t i = kP + 1; i + kP + 1 < knots_.size(); ++i) {
    if (!(knots_[i] > 0.0 && knots_[i] < 1.0)) {
      throw std::invalid_argument("interior knots must lie strictly in (0,1)");
    }
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i] < knots_[i - 1]) {
      throw std::invalid_argument("knot vector must be nondecreasing");
    }
  }
}

void NurbsCurve::rational_derivatives(double u, int order, Vec2* out) const {
  check_parameter(u);
  const int span = find_span(n(), kP, u, knots_);
  const int nd = std::min(order, kP);
  double ders[kP + 1][kP + 1];
  cubic_basis_derivatives(span, u, nd, knots_, ders);

  // Homogeneous derivatives; orders above p vanish.
  std::array<Vec2, kMaxOrder + 1> a_ders;
  std::array<double, kMaxOrder + 1> w_ders;
  for (int k = 0; k <= order; ++k) {
    a_ders[k].setZero();
    w_ders[k] = 0.0;
    if (k > nd) continue;
    for (int j = 0; j <= kP; ++j) {
      const int idx = span - kP + j;
      const double nw = ders[k][j] * weights_[idx];
      a_ders[k] += nw * control_points_[idx];
      w_ders[k] += nw;
    }
  }
  for (int k = 0; k <= order; ++k) {
    Vec2 v = a_ders[k];
    for (int i = 1; i <= k; ++i) {
      v -= binomial(k, i) * w_ders[i] * out[k - i];
    }
    out[k] = v / w_ders[0];
  }
}

Vec2 NurbsCurve::evaluate(double u) const {
  Vec2 out[1];
  rational_derivatives(u, 0, out);
  return out[0];
}

Vec2 NurbsCurve::derivative(double u, int k) const {
  if (k < 1) throw DomainError("derivative order must be >= 1");
  if (k > kMaxOrder) throw DomainError("derivative order too large");
  std::array<Vec2, kMaxOrder + 1> out;
  rational_derivatives(u, k, out.data());
  return out[k];
}

std::array<Vec2, 3> NurbsCurve::derivatives2(double u) const {
  std::array<Vec2, 3> out;
  rational_derivatives(u, 2, out.data());
  return out;
}

double NurbsCurve::signed_curvature(double u) const {
  const auto d = derivatives2(u);
  const double speed = d[1].norm();
  if (speed <= kMinSpeed) {
    throw SingularityError("degenerate tangent in curvature", u);
  }
  const double cross = d[1].x() * d[2].y() - d[1].y() * d[2].x();
  return cross / (speed * speed * speed);
}

double NurbsCurve::curvature(double u) const {
  return std::abs(signed_curvature(u));
}

std::vector<double> uniform_clamped_knots(int n, int degree) {
  const int interior = n - degree;
  if (interior < 0) throw std::invalid_argument("too few control points");
  std::vector<double> knots(n + degree + 2, 0.0);
  for (int i = 0; i < interior; ++i) {
    knots[degree + 1 + i] = static_cast<double>(i + 1) / (interior + 1);
  }
  for (int i = 0; i <= degree; ++i) knots[knots.size() - 1 - i] = 1.0;
  return knots;
}

std::vector<double> greville_abscissae(std::span<const double> knots,
                                       int degree) {
  const int count = static_cast<int>(knots.size()) - degree - 1;
  std::vector<double> xi(count);
  for (int i = 0; i < count; ++i) {
    double sum = 0.0;
    for (int j = 1; j <= degree; ++j) sum += knots[i + j];
    xi[i] = sum / degree;
  }
  return xi;
}

}  // namespace raceline
