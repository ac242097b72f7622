#include "raceline/optimizer.hpp"

#include <ostream>
#include <stdexcept>

#include "raceline/curve_io.hpp"

namespace raceline {

SearchSpace SearchSpace::around(const FreeParameters& initial, double position_scale) {
  if (!(position_scale > 0.0)) throw std::invalid_argument("search space: scale must be > 0");
  const std::vector<double> theta = encode(initial);
  SearchSpace s;
  s.n = initial.n();
  s.origin = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  s.scale = Eigen::VectorXd::Ones(s.origin.size());
  const Eigen::Index points = 2 * static_cast<Eigen::Index>(initial.control_points.size());
  s.scale.head(points).setConstant(position_scale);
  return s;
}

FreeParameters SearchSpace::to_params(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd theta = origin + scale.cwiseProduct(x);
  return decode(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())), n);
}

Eigen::VectorXd SearchSpace::to_search(const FreeParameters& params) const {
  const std::vector<double> theta = encode(params);
  if (static_cast<Eigen::Index>(theta.size()) != origin.size()) {
    throw std::invalid_argument("search space: dimension mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> t(theta.data(), origin.size());
  return (t - origin).cwiseQuotient(scale);
}

OptimizeResult optimize(const FreeParameters& initial, const CandidateObjective& objective,
                        const SearchSpace& space, const OptimizeOptions& options,
                        const CmaState* warm_start) {
  if (options.budget < 1) throw std::invalid_argument("optimize: budget must be > 0");
  OptimizeResult result;
  result.best = initial;
  result.best_terms = objective(initial);
  result.evaluations = 1;

  if (warm_start) {
    result.state = *warm_start;
    result.state.sigma *= options.restart_sigma_factor;
  } else {
    result.state = make_cma_state(space.to_search(initial), options.sigma0, options.seed,
                                  options.population);
  }

  std::vector<ObjectiveTerms> terms;
  const BatchEvaluator evaluate = [&](const std::vector<Eigen::VectorXd>& xs) {
    terms.assign(xs.size(), ObjectiveTerms{});
    std::vector<double> costs(xs.size());
    parallel_for(xs.size(), options.threads, [&](std::size_t i) {
      terms[i] = objective(space.to_params(xs[i]));
      costs[i] = terms[i].cost;
    });
    return costs;
  };

  while (result.evaluations + result.state.population <= options.budget) {
    const CmaStepResult step = cma_step(result.state, evaluate);
    result.evaluations += result.state.population;
    if (step.repaired) ++result.repairs;
    if (step.best_cost < result.best_terms.cost) {
      std::size_t idx = 0;
      for (; idx < terms.size(); ++idx) {
        if (terms[idx].cost == step.best_cost) break;
      }
      result.best = space.to_params(step.best);
      result.best_terms = terms[idx];
    }
    result.history.push_back({result.state.generation, result.evaluations,
                              result.best_terms.cost, step.mean_cost, result.state.sigma});
  }
  return result;
}

void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& history) {
  os << "generation,evaluations,best_cost,mean_cost,sigma\n";
  for (const HistoryRow& r : history) {
    os << r.generation << ',' << r.evaluations << ',' << format_double(r.best_cost) << ','
       << format_double(r.mean_cost) << ',' << format_double(r.sigma) << "\n";
  }
}

}  // namespace raceline
