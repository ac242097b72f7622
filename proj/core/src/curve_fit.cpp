#include "raceline/curve_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace raceline {
namespace {

constexpr int kP = NurbsCurve::kDegree;

// Newton projection of q onto the periodic curve starting from t.
double project_parameter(const NurbsCurve& curve, const Vec2& q, double t) {
  for (int it = 0; it < 6; ++it) {
    const auto d = curve.derivatives2(t);
    const Vec2 diff = d[0] - q;
    const double g = diff.dot(d[1]);
    const double h = d[1].squaredNorm() + diff.dot(d[2]);
    if (h <= 0.0) break;
    double step = g / h;
    step = std::clamp(step, -0.02, 0.02);
    t -= step;
    t -= std::floor(t);
    if (std::abs(step) < 1e-14) break;
  }
  return t;
}

}  // namespace

CenterlineFit fit_centerline(std::span<const Vec2> input, int n,
                             int correction_rounds) {
  if (n - 2 < 4) throw std::invalid_argument("n too small for a closed curve");
  if (static_cast<int>(input.size()) < n + 1) {
    throw std::invalid_argument("too few points for the requested control count");
  }
  std::vector<Vec2> points(input.begin(), input.end());

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const Vec2& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Vec2& p : points) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double major = eig.eigenvalues()(1);
  const double minor = eig.eigenvalues()(0);
  if (!(major > 0.0) || minor <= 1e-10 * major) {
    throw std::invalid_argument("points are collinear or coincident; loop not closable");
  }
  const double scale = std::sqrt(major / static_cast<double>(points.size()));
  if ((points.front() - points.back()).norm() <= 1e-9 * scale) points.pop_back();
  const int count = static_cast<int>(points.size());

  // Closed chord-length parameters.
  std::vector<double> t(count, 0.0);
  double total = 0.0;
  for (int i = 1; i <= count; ++i) {
    total += (points[i % count] - points[i - 1]).norm();
    if (i < count) t[i] = total;
  }
  for (double& ti : t) ti /= total;

  const std::vector<double> knots = uniform_clamped_knots(n);
  const std::vector<double> interior(knots.begin() + kP + 1, knots.end() - kP - 1);
  const int free_count = n - 2;

  // The closure map is linear in the free points for fixed weights/knots;
  // recover it column by column.
  Eigen::MatrixXd closure(n + 1, free_count);
  FreeParameters unit;
  unit.weights.assign(free_count, 1.0);
  unit.interior_knots = interior;
  unit.control_points.assign(free_count, Vec2::Zero());
  for (int j = 0; j < free_count; ++j) {
    unit.control_points[j] = Vec2(1.0, 0.0);
    const NurbsCurve c = apply_closure(unit);
    for (int i = 0; i <= n; ++i) closure(i, j) = c.control_points()[i].x();
    unit.control_points[j] = Vec2::Zero();
  }

  Eigen::MatrixXd rhs(count, 2);
  for (int i = 0; i < count; ++i) rhs.row(i) = points[i].transpose();

  FreeParameters result;
  result.weights.assign(free_count, 1.0);
  result.interior_knots = interior;
  result.control_points.assign(free_count, Vec2::Zero());

  auto solve = [&] {
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(count, n + 1);
    for (int i = 0; i < count; ++i) {
      const BasisValues b = basis_functions(t[i], knots, kP);
      for (int j = 0; j <= kP; ++j) basis(i, b.span - kP + j) = b.values[j];
    }
    const Eigen::MatrixXd design = basis * closure;
    const Eigen::MatrixXd sol =
        design.completeOrthogonalDecomposition().solve(rhs);
    for (int j = 0; j < free_count; ++j) {
      result.control_points[j] = Vec2(sol(j, 0), sol(j, 1));
    }
  };

  solve();
  for (int round = 0; round < correction_rounds; ++round) {
    const NurbsCurve curve = apply_closure(result);
    for (int i = 0; i < count; ++i) t[i] = project_parameter(curve, points[i], t[i]);
    solve();
  }

  const NurbsCurve curve = apply_closure(result);
  CenterlineFit fit{result, 0.0};
  for (int i = 0; i < count; ++i) {
    const double ti = project_parameter(curve, points[i], t[i]);
    fit.residual = std::max(fit.residual, (curve.evaluate(ti) - points[i]).norm());
  }
  if (!std::isfinite(fit.residual)) {
    throw std::invalid_argument("degenerate input: fit did not produce a finite curve");
  }
  return fit;
}

}  // namespace raceline
