#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "raceline/cmaes.hpp"
#include "raceline/free_parameters.hpp"
#include "raceline/objective.hpp"

namespace raceline {

/// Affine map between the flat encoding and the normalized search space:
/// theta = origin + scale .* x.
struct SearchSpace {
  int n = 0;  ///< last control point index of the curve
  Eigen::VectorXd origin;
  Eigen::VectorXd scale;

  /// Centered on initial; control point coordinates scaled by
  /// position_scale, log-weights and knot logits by 1.
  static SearchSpace around(const FreeParameters& initial, double position_scale);

  FreeParameters to_params(const Eigen::VectorXd& x) const;
  Eigen::VectorXd to_search(const FreeParameters& params) const;
  int dimension() const { return static_cast<int>(origin.size()); }
};

struct OptimizeOptions {
  long budget = 15000;  ///< objective evaluations, including the initial one
  double sigma0 = 0.1;
  std::uint64_t seed = 1;
  int population = 0;  ///< 0: default
  int threads = 1;
  /// Step size multiplier applied to a warm-start state.
  double restart_sigma_factor = 2.0;
};

struct HistoryRow {
  int generation = 0;
  long evaluations = 0;
  double best_cost = 0.0;  ///< best so far
  double mean_cost = 0.0;  ///< population mean of this generation
  double sigma = 0.0;
};

struct OptimizeResult {
  FreeParameters best;
  ObjectiveTerms best_terms;
  long evaluations = 0;
  std::vector<HistoryRow> history;
  CmaState state;
  int repairs = 0;  ///< generations that needed covariance repair
};

using CandidateObjective = std::function<ObjectiveTerms(const FreeParameters&)>;

/// Runs CMA-ES from initial until the next generation would exceed the
/// budget. With warm_start the search continues from that state (sigma
/// inflated); initial is still scored first and seeds the best-so-far.
OptimizeResult optimize(const FreeParameters& initial, const CandidateObjective& objective,
                        const SearchSpace& space, const OptimizeOptions& options,
                        const CmaState* warm_start = nullptr);

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history);

}  // namespace raceline
