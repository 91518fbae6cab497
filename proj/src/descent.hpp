#ifndef MBMF_DESCENT_HPP
#define MBMF_DESCENT_HPP

// Step-size control shared by the bounded trainer and the MF baseline.
//
// Problem must provide:
//   double objective() const;             objective of the current iterate
//   bool compute_direction();             false when the gradient is exactly zero
//   double propose(double lr_a, double lr_b);   objective of the candidate step
//   void accept();                        make the candidate current

#include <cmath>
#include <string>

#include "mbmf/optimizer.hpp"

namespace mbmf::detail {

template <typename Problem>
TrainTrace run_descent(Problem& problem, const TrainConfig& cfg) {
  TrainTrace trace;
  trace.initial_objective = problem.objective();
  double current = trace.initial_objective;
  double lr_a = cfg.lr_phi;
  double lr_b = cfg.lr_theta;
  Index small_steps = 0;

  for (Index it = 0; it < cfg.max_iters; ++it) {
    if (!problem.compute_direction()) {
      trace.reason = Termination::stationary;
      return trace;
    }
    const double candidate = problem.propose(lr_a, lr_b);
    trace.objective.push_back(candidate);
    trace.lr_phi.push_back(lr_a);
    trace.lr_theta.push_back(lr_b);
    trace.iterations = it + 1;

    if (!std::isfinite(candidate) || candidate > cfg.divergence_factor * trace.initial_objective) {
      trace.accepted.push_back(false);
      trace.reason = Termination::diverged;
      throw DivergenceError("objective diverged at iteration " + std::to_string(it + 1) + " (value " +
                                std::to_string(candidate) + ", initial " +
                                std::to_string(trace.initial_objective) + ")",
                            trace);
    }

    const bool accepted = candidate <= current;
    trace.accepted.push_back(accepted);
    if (!accepted) {
      // Roll back: the candidate is discarded, next iteration retries smaller.
      lr_a /= cfg.lr_shrink;
      lr_b /= cfg.lr_shrink;
      continue;
    }
    problem.accept();
    const double decrease = current - candidate;
    current = candidate;
    lr_a *= cfg.lr_grow;
    lr_b *= cfg.lr_grow;
    small_steps = decrease < cfg.tol ? small_steps + 1 : 0;
    if (small_steps >= cfg.patience) {
      trace.reason = Termination::converged;
      return trace;
    }
  }
  trace.reason = Termination::max_iters;
  return trace;
}

}  // namespace mbmf::detail

#endif  // MBMF_DESCENT_HPP
