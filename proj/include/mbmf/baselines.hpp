#ifndef MBMF_BASELINES_HPP
#define MBMF_BASELINES_HPP

#include <span>
#include <utility>
#include <vector>

#include "mbmf/data.hpp"
#include "mbmf/optimizer.hpp"

namespace mbmf {

/// Unconstrained factors; no magnitude invariant applies.
struct BaselineModel {
  RowMatrix w;  // N x K
  ColMatrix h;  // K x M
};

struct BaselineResult {
  BaselineModel model;
  TrainTrace trace;
};

/// Plain masked matrix factorisation: gradient descent on W and H with the
/// same step-size and termination rules as the bounded trainer. Unregularised.
BaselineResult train_mf(const SparseObservations& data, Index k, const TrainConfig& cfg);
BaselineResult train_mf(const SparseObservations& data, const TrainConfig& cfg, BaselineModel initial);

/// Masked NMF with multiplicative updates. The trace records the objective
/// after every sweep (all sweeps are accepted; step sizes are unused).
/// Throws DataError on negative observations.
BaselineResult train_nmf(const SparseObservations& data, Index k, const TrainConfig& cfg);

/// Uniform (0, 1) entries scaled by sqrt(mean|V| / k).
BaselineModel random_baseline_factors(const SparseObservations& data, Index k, std::uint64_t seed);

std::vector<double> predict(const BaselineModel& model, std::span<const std::pair<Index, Index>> pairs);

/// Objective of a baseline model (same masked squared error as the bounded one).
double objective(const SparseObservations& data, const BaselineModel& model,
                 kernels::Backend backend = kernels::Backend::omp);

}  // namespace mbmf

#endif  // MBMF_BASELINES_HPP
