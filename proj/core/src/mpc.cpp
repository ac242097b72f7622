#include "raceline/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "raceline/errors.hpp"

namespace raceline {
namespace {

constexpr int kNx = 5;
constexpr int kNu = 2;

using StateVec = Eigen::Matrix<double, kNx, 1>;

StateVec to_vec(const VehicleState& s) {
  StateVec v;
  v << s.x, s.y, s.heading, s.steer, s.speed;
  return v;
}

VehicleState from_vec(const StateVec& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

struct Problem {
  const MpcConfig& cfg;
  VehicleState x0;
  std::span<const ReferenceState> ref;
  std::vector<double> a_ff;
  std::vector<double> steer_rate_ff;

  int rows() const { return 7 * cfg.horizon; }

  std::vector<VehicleState> rollout(const Eigen::VectorXd& u) const {
    std::vector<VehicleState> xs(cfg.horizon + 1);
    xs[0] = x0;
    for (int k = 0; k < cfg.horizon; ++k) {
      xs[k + 1] = predict_step(xs[k], {u(2 * k), u(2 * k + 1)}, cfg.dt, cfg.wheelbase);
    }
    return xs;
  }

  double stage_scale(int k) const { return k == cfg.horizon ? cfg.terminal_scale : 1.0; }

  Eigen::VectorXd residuals(const Eigen::VectorXd& u, const std::vector<VehicleState>& xs) const {
    Eigen::VectorXd r(rows());
    int row = 0;
    for (int k = 1; k <= cfg.horizon; ++k) {
      const VehicleState& x = xs[k];
      const ReferenceState& rf = ref[k];
      const double s = stage_scale(k);
      const double wp = std::sqrt(s * cfg.w_position);
      r(row++) = wp * (x.x - rf.position.x());
      r(row++) = wp * (x.y - rf.position.y());
      r(row++) = std::sqrt(s * cfg.w_heading) * wrap_angle(x.heading - rf.heading);
      r(row++) = std::sqrt(s * cfg.w_speed) * (x.speed - rf.speed);
      const double excess = std::max(0.0, std::abs(x.steer) - cfg.max_steer);
      r(row++) = std::sqrt(cfg.w_steer_limit) * std::copysign(excess, x.steer);
    }
    for (int k = 0; k < cfg.horizon; ++k) {
      r(row++) = std::sqrt(cfg.w_accel) * (u(2 * k) - a_ff[k]);
      r(row++) = std::sqrt(cfg.w_steer_rate) * (u(2 * k + 1) - steer_rate_ff[k]);
    }
    return r;
  }

  // d residual_k / d x_k for the stage block (5 rows).
  Eigen::Matrix<double, 5, kNx> stage_jacobian(int k, const VehicleState& x) const {
    Eigen::Matrix<double, 5, kNx> d = Eigen::Matrix<double, 5, kNx>::Zero();
    const double s = stage_scale(k);
    const double wp = std::sqrt(s * cfg.w_position);
    d(0, 0) = wp;
    d(1, 1) = wp;
    d(2, 2) = std::sqrt(s * cfg.w_heading);
    d(3, 4) = std::sqrt(s * cfg.w_speed);
    if (std::abs(x.steer) > cfg.max_steer) d(4, 3) = std::sqrt(cfg.w_steer_limit);
    return d;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& u, const std::vector<VehicleState>& xs) const {
    const int h = cfg.horizon;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(rows(), kNu * h);
    Eigen::MatrixXd sens = Eigen::MatrixXd::Zero(kNx, kNu * h);  // d x_k / d u
    constexpr double eps = 1e-7;
    for (int k = 0; k < h; ++k) {
      const VehicleState& x = xs[k];
      const ControlInput in{u(2 * k), u(2 * k + 1)};
      const StateVec base = to_vec(xs[k + 1]);
      Eigen::Matrix<double, kNx, kNx> a;
      Eigen::Matrix<double, kNx, kNu> b;
      for (int i = 0; i < kNx; ++i) {
        StateVec xp = to_vec(x);
        xp(i) += eps;
        a.col(i) = (to_vec(predict_step(from_vec(xp), in, cfg.dt, cfg.wheelbase)) - base) / eps;
      }
      for (int i = 0; i < kNu; ++i) {
        ControlInput ip = in;
        (i == 0 ? ip.accel : ip.steer_rate) += eps;
        b.col(i) = (to_vec(predict_step(x, ip, cfg.dt, cfg.wheelbase)) - base) / eps;
      }
      sens = a * sens;
      sens.middleCols(kNu * k, kNu) += b;
      jac.middleRows(5 * k, 5) = stage_jacobian(k + 1, xs[k + 1]) * sens;
    }
    const int input_rows = 5 * h;
    for (int k = 0; k < h; ++k) {
      jac(input_rows + 2 * k, 2 * k) = std::sqrt(cfg.w_accel);
      jac(input_rows + 2 * k + 1, 2 * k + 1) = std::sqrt(cfg.w_steer_rate);
    }
    return jac;
  }

  double cost(const Eigen::VectorXd& u) const {
    return residuals(u, rollout(u)).squaredNorm();
  }
};

// min 0.5 x'Hx + g'x  s.t. lo <= x <= hi, projected Newton with Armijo search.
Eigen::VectorXd box_qp(const Eigen::MatrixXd& hess, const Eigen::VectorXd& g,
                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(g.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n).cwiseMax(lo).cwiseMin(hi);
  auto value = [&](const Eigen::VectorXd& v) { return 0.5 * v.dot(hess * v) + g.dot(v); };
  double val = value(x);
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd grad = g + hess * x;
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      const bool at_lo = x(i) <= lo(i) && grad(i) > 0.0;
      const bool at_hi = x(i) >= hi(i) && grad(i) < 0.0;
      if (!at_lo && !at_hi) free.push_back(i);
    }
    if (free.empty()) break;
    const int nf = static_cast<int>(free.size());
    Eigen::MatrixXd hff(nf, nf);
    Eigen::VectorXd gf(nf);
    for (int i = 0; i < nf; ++i) {
      gf(i) = grad(free[i]);
      for (int j = 0; j < nf; ++j) hff(i, j) = hess(free[i], free[j]);
    }
    if (gf.norm() < 1e-12) break;
    const Eigen::VectorXd step_f = -hff.llt().solve(gf);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < nf; ++i) dir(free[i]) = step_f(i);

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    double cand_val = val;
    while (alpha > 1e-8) {
      candidate = (x + alpha * dir).cwiseMax(lo).cwiseMin(hi);
      cand_val = value(candidate);
      if (cand_val - val <= 0.1 * grad.dot(candidate - x)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const double improvement = val - cand_val;
    x = candidate;
    val = cand_val;
    if (improvement < 1e-14 * (1.0 + std::abs(val))) break;
  }
  return x;
}

}  // namespace

void MpcConfig::validate() const {
  if (horizon < 5) throw ConfigError("mpc: horizon must be >= 5");
  if (!(dt > 0.0)) throw ConfigError("mpc: dt must be positive");
  if (w_position < 0 || w_heading < 0 || w_speed < 0 || w_accel < 0 || w_steer_rate < 0 ||
      terminal_scale < 0 || w_steer_limit < 0) {
    throw ConfigError("mpc: weights must be nonnegative");
  }
  if (!(wheelbase > 0.0) || !(max_steer > 0.0) || !(max_steer_rate > 0.0) ||
      !(max_accel > 0.0) || max_iterations < 1) {
    throw ConfigError("mpc: bounds must be positive");
  }
}

MpcConfig with_vehicle(MpcConfig cfg, const VehicleParams& vehicle) {
  cfg.wheelbase = vehicle.wheelbase;
  cfg.max_steer = vehicle.max_steer;
  cfg.max_steer_rate = vehicle.max_steer_rate;
  cfg.max_accel = vehicle.max_accel;
  return cfg;
}

VehicleState predict_step(const VehicleState& s, const ControlInput& in, double dt,
                          double wheelbase) {
  auto axpy = [](const VehicleState& a, double h, const VehicleState& d) {
    return VehicleState{a.x + h * d.x, a.y + h * d.y, a.heading + h * d.heading,
                        a.steer + h * d.steer, a.speed + h * d.speed};
  };
  const VehicleState k1 = dynamics(s, in, wheelbase);
  const VehicleState k2 = dynamics(axpy(s, 0.5 * dt, k1), in, wheelbase);
  const VehicleState k3 = dynamics(axpy(s, 0.5 * dt, k2), in, wheelbase);
  const VehicleState k4 = dynamics(axpy(s, dt, k3), in, wheelbase);
  return {s.x + dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.y + dt / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          s.heading + dt / 6.0 * (k1.heading + 2 * k2.heading + 2 * k3.heading + k4.heading),
          s.steer + dt / 6.0 * (k1.steer + 2 * k2.steer + 2 * k3.steer + k4.steer),
          s.speed + dt / 6.0 * (k1.speed + 2 * k2.speed + 2 * k3.speed + k4.speed)};
}

std::vector<ReferenceState> reference_window(const TimedTrajectory& trajectory,
                                             double t_now, int count, double dt) {
  const double lap = trajectory.lap_time;
  if (!(lap > 0.0) || trajectory.size() < 2) {
    throw std::invalid_argument("reference window needs a sampled trajectory");
  }
  std::vector<ReferenceState> window(count);
  const int n = trajectory.size();
  for (int k = 0; k < count; ++k) {
    double u = (t_now + k * dt) / lap;
    u -= std::floor(u);
    if (u >= 1.0) u = 0.0;
    ReferenceState& r = window[k];
    r.u = u;
    if (trajectory.curve) {
      const auto d = trajectory.curve->derivatives2(u);
      const double speed = d[1].norm();
      const double cross = d[1].x() * d[2].y() - d[1].y() * d[2].x();
      r.position = d[0];
      r.heading = std::atan2(d[1].y(), d[1].x());
      r.speed = speed / lap;
      r.accel = d[1].dot(d[2]) / speed / (lap * lap);
      r.curvature = cross / (speed * speed * speed);
    } else {
      const double g = u * n;
      const int i0 = std::min(static_cast<int>(g), n - 1);
      const int i1 = (i0 + 1) % n;
      const double t = g - i0;
      const TrajectorySample& a = trajectory.samples[i0];
      const TrajectorySample& b = trajectory.samples[i1];
      r.position = (1.0 - t) * a.position + t * b.position;
      r.heading = a.heading + t * wrap_angle(b.heading - a.heading);
      r.speed = (1.0 - t) * a.v + t * b.v;
      r.accel = (1.0 - t) * a.a_par + t * b.a_par;
      r.curvature = (1.0 - t) * a.kappa + t * b.kappa;
    }
  }
  return window;
}

TrackingMpc::TrackingMpc(MpcConfig cfg) : cfg_(cfg) { cfg_.validate(); }

MpcSolution TrackingMpc::solve(const VehicleState& state,
                               std::span<const ReferenceState> window) {
  const int h = cfg_.horizon;
  if (static_cast<int>(window.size()) < h + 1) {
    throw std::invalid_argument("mpc reference window shorter than horizon + 1");
  }
  Problem prob{cfg_, state, window, std::vector<double>(h), std::vector<double>(h)};
  for (int k = 0; k < h; ++k) {
    const double s0 = std::atan(cfg_.wheelbase * window[k].curvature);
    const double s1 = std::atan(cfg_.wheelbase * window[k + 1].curvature);
    prob.a_ff[k] = std::clamp(window[k].accel, -cfg_.max_accel, cfg_.max_accel);
    prob.steer_rate_ff[k] =
        std::clamp((s1 - s0) / cfg_.dt, -cfg_.max_steer_rate, cfg_.max_steer_rate);
  }

  Eigen::VectorXd lb(kNu * h);
  Eigen::VectorXd ub(kNu * h);
  Eigen::VectorXd u_ff(kNu * h);
  for (int k = 0; k < h; ++k) {
    lb(2 * k) = -cfg_.max_accel;
    ub(2 * k) = cfg_.max_accel;
    lb(2 * k + 1) = -cfg_.max_steer_rate;
    ub(2 * k + 1) = cfg_.max_steer_rate;
    u_ff(2 * k) = prob.a_ff[k];
    u_ff(2 * k + 1) = prob.steer_rate_ff[k];
  }

  MpcSolution sol;
  sol.feedforward_cost = prob.cost(u_ff);
  Eigen::VectorXd u = u_ff;
  double cost = sol.feedforward_cost;
  if (static_cast<int>(warm_start_.size()) == h) {
    Eigen::VectorXd u_warm(kNu * h);
    for (int k = 0; k < h; ++k) {
      u_warm(2 * k) = warm_start_[k].accel;
      u_warm(2 * k + 1) = warm_start_[k].steer_rate;
    }
    u_warm = u_warm.cwiseMax(lb).cwiseMin(ub);
    const double warm_cost = prob.cost(u_warm);
    if (warm_cost < cost) {
      u = u_warm;
      cost = warm_cost;
    }
  }
  sol.cost_history.push_back(cost);

  for (int it = 0; it < cfg_.max_iterations; ++it) {
    const auto xs = prob.rollout(u);
    const Eigen::VectorXd r = prob.residuals(u, xs);
    const Eigen::MatrixXd jac = prob.jacobian(u, xs);
    Eigen::MatrixXd hess = jac.transpose() * jac;
    hess.diagonal().array() += 1e-8;
    const Eigen::VectorXd grad = jac.transpose() * r;
    const Eigen::VectorXd delta = box_qp(hess, grad, lb - u, ub - u);

    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-4) {
      const Eigen::VectorXd trial = (u + alpha * delta).cwiseMax(lb).cwiseMin(ub);
      const double trial_cost = prob.cost(trial);
      if (trial_cost < cost) {
        const double improvement = cost - trial_cost;
        u = trial;
        cost = trial_cost;
        accepted = true;
        sol.cost_history.push_back(cost);
        if (improvement <= 1e-7 * (1.0 + cost)) sol.converged = true;
        break;
      }
      alpha *= 0.5;
    }
    sol.iterations = it + 1;
    if (!accepted) {
      sol.converged = true;  // no descent available: stationary for the model
      break;
    }
    if (sol.converged) break;
  }

  sol.cost = cost;
  sol.predicted = prob.rollout(u);
  sol.inputs.resize(h);
  for (int k = 0; k < h; ++k) sol.inputs[k] = {u(2 * k), u(2 * k + 1)};
  sol.command = sol.inputs.front();

  warm_start_.assign(sol.inputs.begin() + 1, sol.inputs.end());
  warm_start_.push_back(sol.inputs.back());
  return sol;
}

}  // namespace raceline
