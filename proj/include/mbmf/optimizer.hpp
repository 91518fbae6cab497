#ifndef MBMF_OPTIMIZER_HPP
#define MBMF_OPTIMIZER_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mbmf/data.hpp"
#include "mbmf/kernels.hpp"
#include "mbmf/types.hpp"

namespace mbmf {

struct TrainConfig {
  Index k = 10;
  Index max_iters = 500;
  double tol = 1e-5;
  Index patience = 10;
  double lr_phi = 0.1;
  double lr_theta = 0.1;
  double lr_grow = 1.1;
  double lr_shrink = 2.0;
  std::uint64_t seed = 0;
  Variant variant = Variant::nonnegative;

  /// Abort when a step's objective exceeds this multiple of the initial one.
  double divergence_factor = 1e6;
  kernels::Backend backend = kernels::Backend::omp;
  /// Debug: compute angle gradients one element at a time instead of through
  /// the derivative tensors. Much slower; only useful as a cross-check.
  bool elementwise_updates = false;

  void validate() const;
  /// Everything except the k >= 2 requirement (shared with the baselines).
  void validate_steps() const;
};

enum class Termination { max_iters, converged, stationary, diverged };

const char* to_string(Termination t);

/// One row per iteration. The objective is the value at the proposed step;
/// rejected steps were rolled back. Step sizes are those used for the step.
struct TrainTrace {
  double initial_objective = 0.0;
  std::vector<double> objective;
  std::vector<double> lr_phi;
  std::vector<double> lr_theta;
  std::vector<bool> accepted;
  Index iterations = 0;
  Termination reason = Termination::max_iters;

  /// Objective of the returned model.
  double final_objective() const;
  /// Objectives of accepted iterations, in order.
  std::vector<double> accepted_objectives() const;

  /// CSV with header `iter,objective,lr_phi,lr_theta,accepted`.
  void write_csv(std::ostream& out) const;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, TrainTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

struct FactorGradients {
  RowMatrix grad_w;  // N x K
  ColMatrix grad_h;  // K x M
};

struct AngleGradients {
  RowMatrix d_phi;    // N x (K-1)
  ColMatrix d_theta;  // (K-1) x M
};

enum class GradientPath { accelerated, elementwise };

struct TrainResult {
  FactorModel model;
  AngleState angles;
  TrainTrace trace;
};

/// ||Z * (V - WH)||_F^2 over the observed entries only.
double objective(const SparseObservations& data, const FactorModel& model,
                 kernels::Backend backend = kernels::Backend::omp);

FactorGradients grad_f_wrt_factors(const SparseObservations& data, const FactorModel& model,
                                   kernels::Backend backend = kernels::Backend::omp);

AngleGradients grad_f_wrt_angles(const SparseObservations& data, const AngleState& angles, const MagnitudePair& mags,
                                 GradientPath path = GradientPath::accelerated,
                                 kernels::Backend backend = kernels::Backend::omp);

/// Uniform angles: [0, pi] for all but the last position, [0, 2 pi) for the last.
AngleState random_angles(Index n_rows, Index n_cols, Index k, std::uint64_t seed);

/// Magnitude-bounded factorisation by full-batch gradient descent on the
/// angle matrices with the grow/shrink-and-rollback step rule.
TrainResult train(const SparseObservations& data, const MagnitudePair& mags, const TrainConfig& cfg);
TrainResult train(const SparseObservations& data, const MagnitudePair& mags, const TrainConfig& cfg,
                  AngleState initial);

/// W_i: . H_:j, without any offset.
std::vector<double> predict_raw(const FactorModel& model, std::span<const std::pair<Index, Index>> pairs);
/// Raw prediction plus the offset recorded in model.preprocess.
std::vector<double> predict(const FactorModel& model, std::span<const std::pair<Index, Index>> pairs);

}  // namespace mbmf

#endif  // MBMF_OPTIMIZER_HPP
