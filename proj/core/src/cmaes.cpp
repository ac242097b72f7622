#include "raceline/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace raceline {

namespace {

struct Strategy {
  int mu = 0;
  Eigen::VectorXd weights;
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  double chi_n = 0.0;
};

Strategy strategy(int n, int lambda) {
  Strategy s;
  s.mu = lambda / 2;
  s.weights.resize(s.mu);
  for (int i = 0; i < s.mu; ++i) {
    s.weights[i] = std::log((lambda + 1.0) / 2.0) - std::log(i + 1.0);
  }
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();
  const double nd = n;
  s.c_sigma = (s.mu_eff + 2.0) / (nd + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (nd + 1.0)) - 1.0) +
              s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / nd) / (nd + 4.0 + 2.0 * s.mu_eff / nd);
  s.c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c_1, 2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) /
                                     ((nd + 2.0) * (nd + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
  return s;
}

bool decompose(CmaState& state) {
  state.covariance = 0.5 * (state.covariance + state.covariance.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.covariance);
  Eigen::VectorXd values = eig.eigenvalues();
  bool repaired = false;
  const double top = values.maxCoeff();
  if (eig.info() != Eigen::Success || !std::isfinite(top) || !(top > 0.0)) {
    state.covariance.setIdentity();
    state.basis.setIdentity(state.dimension(), state.dimension());
    state.axis_scales.setOnes(state.dimension());
    return true;
  }
  const double floor = 1e-14 * top;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!(values[i] > floor)) {
      values[i] = floor;
      repaired = true;
    }
  }
  state.basis = eig.eigenvectors();
  state.axis_scales = values.cwiseSqrt();
  if (repaired) {
    state.covariance = state.basis * values.asDiagonal() * state.basis.transpose();
  }
  return repaired;
}

}  // namespace

int default_population(int dimension) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

CmaState make_cma_state(const Eigen::VectorXd& mean, double sigma, std::uint64_t seed,
                        int population) {
  const int n = static_cast<int>(mean.size());
  if (n < 1) throw std::invalid_argument("cma: empty mean");
  if (!(sigma > 0.0)) throw std::invalid_argument("cma: sigma must be > 0");
  CmaState s;
  s.mean = mean;
  s.sigma = sigma;
  s.covariance = Eigen::MatrixXd::Identity(n, n);
  s.basis = Eigen::MatrixXd::Identity(n, n);
  s.axis_scales = Eigen::VectorXd::Ones(n);
  s.path_sigma = Eigen::VectorXd::Zero(n);
  s.path_c = Eigen::VectorXd::Zero(n);
  s.population = population > 0 ? population : default_population(n);
  if (s.population < 2) throw std::invalid_argument("cma: population must be >= 2");
  s.rng.seed(seed);
  return s;
}

CmaStepResult cma_step(CmaState& state, const BatchEvaluator& evaluate) {
  const int n = state.dimension();
  const int lambda = state.population;
  const Strategy s = strategy(n, lambda);

  std::vector<Eigen::VectorXd> y(lambda);
  std::vector<Eigen::VectorXd> x(lambda);
  for (int k = 0; k < lambda; ++k) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = state.normal(state.rng);
    y[k] = state.basis * state.axis_scales.cwiseProduct(z);
    x[k] = state.mean + state.sigma * y[k];
  }
  const std::vector<double> costs = evaluate(x);
  if (static_cast<int>(costs.size()) != lambda) {
    throw std::runtime_error("cma: evaluator returned wrong number of costs");
  }
  state.evaluations += lambda;
  ++state.generation;

  std::vector<int> order(lambda);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return costs[a] < costs[b]; });

  CmaStepResult result;
  result.best = x[order.front()];
  result.best_cost = costs[order.front()];
  result.mean_cost = std::accumulate(costs.begin(), costs.end(), 0.0) / lambda;

  if (costs[order.front()] == costs[order.back()]) {
    // Flat landscape: no ranking information.
    return result;
  }

  Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < s.mu; ++i) y_w += s.weights[i] * y[order[i]];
  state.mean += state.sigma * y_w;

  // C^{-1/2} y_w
  const Eigen::VectorXd c_inv_sqrt_yw =
      state.basis * (state.basis.transpose() * y_w).cwiseQuotient(state.axis_scales);
  state.path_sigma = (1.0 - s.c_sigma) * state.path_sigma +
                     std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * c_inv_sqrt_yw;
  const double ps_norm = state.path_sigma.norm();
  const double decay = 1.0 - std::pow(1.0 - s.c_sigma, 2.0 * state.generation);
  const bool h_sigma =
      ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (n + 1.0)) * s.chi_n;
  state.path_c = (1.0 - s.c_c) * state.path_c;
  if (h_sigma) state.path_c += std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) * y_w;

  const double delta_h = h_sigma ? 0.0 : s.c_c * (2.0 - s.c_c);
  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < s.mu; ++i) {
    const Eigen::VectorXd& yi = y[order[i]];
    rank_mu.noalias() += s.weights[i] * yi * yi.transpose();
  }
  state.covariance = (1.0 + s.c_1 * delta_h - s.c_1 - s.c_mu) * state.covariance +
                     s.c_1 * state.path_c * state.path_c.transpose() + s.c_mu * rank_mu;

  state.sigma *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
  result.repaired = decompose(state);
  return result;
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  const auto workers =
      static_cast<std::size_t>(std::clamp<long>(threads, 1, static_cast<long>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

BatchEvaluator parallel_evaluator(std::function<double(const Eigen::VectorXd&)> f,
                                  int threads) {
  return [f = std::move(f), threads](const std::vector<Eigen::VectorXd>& xs) {
    std::vector<double> costs(xs.size());
    parallel_for(xs.size(), threads, [&](std::size_t i) { costs[i] = f(xs[i]); });
    return costs;
  };
}

}  // namespace raceline
