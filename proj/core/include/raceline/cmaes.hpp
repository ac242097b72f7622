#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace raceline {

/// Full state of a (mu/mu_w, lambda) CMA-ES run, including its random
/// stream, so a copied state continues identically.
struct CmaState {
  Eigen::VectorXd mean;
  double sigma = 0.1;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd basis;        ///< eigenvectors of covariance
  Eigen::VectorXd axis_scales;  ///< sqrt of eigenvalues
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;
  int generation = 0;
  int population = 0;
  long evaluations = 0;
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};

  int dimension() const { return static_cast<int>(mean.size()); }
};

/// Default population size 4 + floor(3 ln d).
int default_population(int dimension);

/// Identity covariance around mean. population <= 0 selects the default.
CmaState make_cma_state(const Eigen::VectorXd& mean, double sigma, std::uint64_t seed,
                        int population = 0);

/// Scores a batch of candidates; costs[i] belongs to candidates[i].
using BatchEvaluator =
    std::function<std::vector<double>(const std::vector<Eigen::VectorXd>&)>;

struct CmaStepResult {
  Eigen::VectorXd best;  ///< best candidate of this generation
  double best_cost = 0.0;
  double mean_cost = 0.0;
  /// Set when the covariance needed eigenvalue flooring.
  bool repaired = false;
};

/// One generation: sample, rank, recombine, update paths, covariance and
/// step size. Ties in cost keep sampling order.
CmaStepResult cma_step(CmaState& state, const BatchEvaluator& evaluate);

/// Runs body(i) for i in [0, count) on up to `threads` threads.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

/// Evaluates f on every candidate using up to `threads` worker threads.
/// Results do not depend on the thread count.
BatchEvaluator parallel_evaluator(std::function<double(const Eigen::VectorXd&)> f,
                                  int threads);

}  // namespace raceline
