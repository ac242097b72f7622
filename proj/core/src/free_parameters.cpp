#include "raceline/free_parameters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "raceline/errors.hpp"

namespace raceline {
namespace {

constexpr int kP = NurbsCurve::kDegree;

}  // namespace

int free_dimension(int n) { return 3 * (n - 2) + (n - kP); }

int FreeParameters::dimension() const { return free_dimension(n()); }

void FreeParameters::validate() const {
  const int count = static_cast<int>(control_points.size());
  // p_{n-2} must not overlap p_2 or the closure would be self-referential.
  if (count < 4) {
    throw std::invalid_argument("closed curve needs at least 4 free control points");
  }
  if (static_cast<int>(weights.size()) != count) {
    throw std::invalid_argument("free weight count must match free control points");
  }
  if (static_cast<int>(interior_knots.size()) != n() - kP) {
    throw std::invalid_argument("interior knot count must equal n - p");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("weights must be strictly positive");
    }
  }
  double previous = 0.0;
  for (double k : interior_knots) {
    if (!(k > previous) || !(k < 1.0)) {
      throw std::invalid_argument("interior knots must be strictly increasing in (0,1)");
    }
    previous = k;
  }
}

NurbsCurve apply_closure(const FreeParameters& free) {
  free.validate();
  const int n = free.n();
  const auto& k = free.interior_knots;

  const double a1 = k.front();
  const double a2 = k[1];
  const double b1 = 1.0 - k.back();
  const double b2 = 1.0 - k[k.size() - 2];
  if (a1 < kMinClosureSpan || b1 < kMinClosureSpan || a2 < kMinClosureSpan ||
      b2 < kMinClosureSpan) {
    throw ConditioningError("end knot spans too small for the closure system");
  }

  const auto& p = free.control_points;
  const auto& w = free.weights;

  // Homogeneous start derivatives A (weighted points) and W (weights) of the
  // clamped cubic at u = 0.
  const Vec2 a0 = w[0] * p[0];
  const Vec2 a_d1 = 3.0 / a1 * (w[1] * p[1] - w[0] * p[0]);
  const Vec2 a_d2 = 6.0 / a1 *
                    ((w[2] * p[2] - w[1] * p[1]) / a2 - (w[1] * p[1] - w[0] * p[0]) / a1);
  const double w0 = w[0];
  const double w_d1 = 3.0 / a1 * (w[1] - w[0]);
  const double w_d2 = 6.0 / a1 * ((w[2] - w[1]) / a2 - (w[1] - w[0]) / a1);

  const Vec2 c0 = a0 / w0;
  const Vec2 c1 = (a_d1 - w_d1 * c0) / w0;
  const Vec2 c2 = (a_d2 - 2.0 * w_d1 * c1 - w_d2 * c0) / w0;

  // Mirrored end weights.
  const double wn = w[0];
  const double wn1 = w[1];
  const double wn2 = w[2];
  const double we_d1 = 3.0 / b1 * (wn - wn1);
  const double we_d2 = 6.0 / b1 * ((wn - wn1) / b1 - (wn1 - wn2) / b2);

  // Homogeneous end derivatives that reproduce c0, c1, c2 through the
  // quotient rule with the end weight function.
  const Vec2 target_d1 = wn * c1 + we_d1 * c0;
  const Vec2 target_d2 = wn * c2 + 2.0 * we_d1 * c1 + we_d2 * c0;

  const Vec2 hn = wn * c0;
  const Vec2 hn1 = hn - b1 / 3.0 * target_d1;
  const Vec2 hn2 = hn1 - b2 * ((hn - hn1) / b1 - b1 / 6.0 * target_d2);

  std::vector<Vec2> points(p);
  points.push_back(hn2 / wn2);
  points.push_back(hn1 / wn1);
  points.push_back(p[0]);

  std::vector<double> weights(w);
  weights.push_back(wn2);
  weights.push_back(wn1);
  weights.push_back(wn);

  std::vector<double> knots(n + kP + 2, 0.0);
  for (std::size_t i = 0; i < k.size(); ++i) knots[kP + 1 + i] = k[i];
  for (int i = 0; i <= kP; ++i) knots[knots.size() - 1 - i] = 1.0;

  return NurbsCurve(std::move(points), std::move(weights), std::move(knots));
}

std::vector<double> encode(const FreeParameters& free) {
  free.validate();
  std::vector<double> theta;
  theta.reserve(free.dimension());
  for (const Vec2& p : free.control_points) {
    theta.push_back(p.x());
    theta.push_back(p.y());
  }
  for (double w : free.weights) theta.push_back(std::log(w));
  const auto& k = free.interior_knots;
  const double last = 1.0 - k.back();
  double previous = 0.0;
  for (double knot : k) {
    theta.push_back(std::log((knot - previous) / last));
    previous = knot;
  }
  return theta;
}

namespace {
// Bounds the dynamic range of decoded weights and knot spans.
constexpr double kMaxLogSpread = 20.0;
}  // namespace

FreeParameters decode(std::span<const double> theta, int n) {
  if (n - 2 < 4 || static_cast<int>(theta.size()) != free_dimension(n)) {
    throw std::invalid_argument("parameter vector size does not match n");
  }
  const int count = n - 2;
  const int knot_count = n - kP;
  FreeParameters free;
  free.control_points.resize(count);
  free.weights.resize(count);
  free.interior_knots.resize(knot_count);
  std::size_t idx = 0;
  for (int i = 0; i < count; ++i) {
    free.control_points[i] = Vec2(theta[idx], theta[idx + 1]);
    idx += 2;
  }
  for (int i = 0; i < count; ++i) {
    free.weights[i] = std::exp(std::clamp(theta[idx++], -kMaxLogSpread, kMaxLogSpread));
  }

  // Normalized increments with an implicit zero logit for the last span.
  std::vector<double> increments(knot_count + 1, 1.0);
  double max_logit = 0.0;
  for (int j = 0; j < knot_count; ++j) max_logit = std::max(max_logit, theta[idx + j]);
  double total = std::exp(std::max(-max_logit, -kMaxLogSpread));
  increments[knot_count] = total;
  for (int j = 0; j < knot_count; ++j) {
    increments[j] = std::exp(std::max(theta[idx + j] - max_logit, -kMaxLogSpread));
    total += increments[j];
  }
  double cumulative = 0.0;
  for (int j = 0; j < knot_count; ++j) {
    cumulative += increments[j] / total;
    free.interior_knots[j] = cumulative;
  }
  return free;
}

}  // namespace raceline
