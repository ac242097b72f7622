#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace raceline::testing {

FreeParameters random_free_parameters(std::mt19937_64& rng, int n, double weight_spread) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::uniform_real_distribution<double> spread(-weight_spread, weight_spread);
  std::uniform_real_distribution<double> inc(0.5, 1.5);
  FreeParameters f;
  const int free_points = n - 2;
  for (int i = 0; i < free_points; ++i) {
    const double a = 2.0 * std::numbers::pi * i / (n + 1);
    f.control_points.emplace_back(4.0 * std::cos(a) + jitter(rng), 2.5 * std::sin(a) + jitter(rng));
    f.weights.push_back(std::exp(spread(rng)));
  }
  const int interior = n - NurbsCurve::kDegree;
  std::vector<double> d(interior + 1);
  for (double& x : d) x = inc(rng);
  double total = 0.0;
  for (double x : d) total += x;
  double acc = 0.0;
  for (int j = 0; j < interior; ++j) {
    acc += d[j];
    f.interior_knots.push_back(acc / total);
  }
  return f;
}

NurbsCurve random_open_curve(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_real_distribution<double> logw(-0.7, 0.7);
  std::uniform_real_distribution<double> inc(0.3, 1.7);
  std::vector<Vec2> pts;
  std::vector<double> w;
  for (int i = 0; i <= n; ++i) {
    pts.emplace_back(coord(rng), coord(rng));
    w.push_back(std::exp(logw(rng)));
  }
  const int p = NurbsCurve::kDegree;
  std::vector<double> knots(p + 1, 0.0);
  std::vector<double> d(n - p + 1);
  double total = 0.0;
  for (double& x : d) total += (x = inc(rng));
  double acc = 0.0;
  for (int j = 0; j < n - p; ++j) knots.push_back((acc += d[j]) / total);
  knots.insert(knots.end(), p + 1, 1.0);
  return NurbsCurve(std::move(pts), std::move(w), std::move(knots));
}

std::vector<Vec2> circle_points(const Vec2& center, double radius, int count) {
  std::vector<Vec2> out;
  for (int i = 0; i < count; ++i) {
    const double a = 2.0 * std::numbers::pi * i / count;
    out.push_back(center + radius * Vec2(std::cos(a), std::sin(a)));
  }
  return out;
}

NurbsCurve linear_precision_curve(const Vec2& a, const Vec2& b, int n) {
  std::vector<double> knots = uniform_clamped_knots(n);
  const std::vector<double> xi = greville_abscissae(knots, NurbsCurve::kDegree);
  std::vector<Vec2> pts;
  for (double x : xi) pts.push_back(a + b * x);
  return NurbsCurve(std::move(pts), std::vector<double>(n + 1, 1.0), std::move(knots));
}

double slow_basis(int i, int p, double u, std::span<const double> knots) {
  if (p == 0) {
    const double lo = knots[i];
    const double hi = knots[i + 1];
    if (u >= lo && u < hi) return 1.0;
    // Right-closed last nonempty span.
    if (u == knots.back() && hi == knots.back() && lo < hi) return 1.0;
    return 0.0;
  }
  double left = 0.0;
  double right = 0.0;
  const double d1 = knots[i + p] - knots[i];
  const double d2 = knots[i + p + 1] - knots[i + 1];
  if (d1 > 0.0) left = (u - knots[i]) / d1 * slow_basis(i, p - 1, u, knots);
  if (d2 > 0.0) right = (knots[i + p + 1] - u) / d2 * slow_basis(i + 1, p - 1, u, knots);
  return left + right;
}

Vec2 homogeneous_de_boor(const NurbsCurve& curve, double u) {
  const int p = curve.degree();
  const auto& t = curve.knots();
  const int n = curve.n();
  int k = p;
  while (k < n && !(u < t[k + 1])) ++k;
  std::vector<Eigen::Vector3d> d(p + 1);
  for (int j = 0; j <= p; ++j) {
    const int idx = j + k - p;
    const double w = curve.weights()[idx];
    d[j] = Eigen::Vector3d(w * curve.control_points()[idx].x(), w * curve.control_points()[idx].y(), w);
  }
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const double denom = t[j + 1 + k - r] - t[j + k - p];
      const double alpha = denom > 0.0 ? (u - t[j + k - p]) / denom : 0.0;
      d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
    }
  }
  return {d[p].x() / d[p].z(), d[p].y() / d[p].z()};
}

double scan_lap_time(const std::function<bool(double)>& feasible, double t_lo, double step) {
  // Feasibility is monotone in T: coarse bracket, then the fine grid.
  double t = t_lo;
  while (!feasible(t)) t *= 1.01;
  t = std::max(t_lo, t / 1.01);
  while (!feasible(t)) t *= 1.0 + step;
  return t;
}

bool lap_time_feasible(const NurbsCurve& curve, const DynamicLimits& limits, double lap_time,
                       int samples, const std::function<double(const Vec2&)>& scale) {
  for (int j = 0; j < samples; ++j) {
    const double u = static_cast<double>(j) / samples;
    const Kinematics k = kinematics_at(curve, u, lap_time);
    const double m = scale(curve.evaluate(u));
    if (k.v > limits.v_max || std::abs(k.a_par) > m * limits.a_par_nominal ||
        std::abs(k.a_perp) > m * limits.a_perp_nominal) {
      return false;
    }
  }
  return true;
}

}  // namespace raceline::testing
