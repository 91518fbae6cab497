#ifndef MBMF_EVAL_HPP
#define MBMF_EVAL_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mbmf/data.hpp"
#include "mbmf/optimizer.hpp"

namespace mbmf {

// Metrics are computed over a mask: a list of entry positions in `truth`,
// with one prediction per masked entry in the same order.

double rmse(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions);
double mae(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions);

enum class F1Aggregation { micro, macro };

/// Per user, an item counts as recommended when its value exceeds that
/// user's mean over the masked cells (truth side and prediction side each use
/// their own mean). Returned as a percentage.
double f1_score(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions,
                F1Aggregation aggregation = F1Aggregation::micro);

struct EvalReport {
  double rmse = 0.0;
  double mae = 0.0;
  double f1 = 0.0;
  Index n_eval_entries = 0;
};

EvalReport evaluate(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions,
                    F1Aggregation aggregation = F1Aggregation::micro);

struct SyntheticData {
  SparseObservations full;
  SparseObservations observed;
  std::vector<std::pair<Index, Index>> missing;  // cells of full not in observed, row-major order
};

/// Uniform random n x m matrix min-max scaled onto [lo, hi]; observed keeps
/// ceil(density * n * m) uniformly chosen cells, repaired so no row or column
/// is empty. Throws DataError when coverage is impossible.
SyntheticData generate_synthetic(Index n, Index m, std::pair<double, double> value_range, double density,
                                 std::uint64_t seed);

struct AlgorithmOutput {
  std::vector<double> predictions;
  std::optional<TrainTrace> trace;
};

/// A factorisation method under test: fit `observed` with latent dimension k
/// and initialisation seed, then predict the given cells.
struct Algorithm {
  std::string name;
  std::function<AlgorithmOutput(const SparseObservations& observed, Index k, std::uint64_t seed,
                                std::span<const std::pair<Index, Index>> cells)>
      run;
};

/// Built-in methods: "mf", "nmf", "mbmf-n", "mbmf-c" and "constant" (predicts
/// the observed mean; zero variance by construction). `value_range` is the
/// declared data range used by the bounded variants.
Algorithm make_algorithm(const std::string& name, const TrainConfig& base, std::pair<double, double> value_range);

struct VarianceReport {
  std::string algorithm;
  Index k = 0;
  double ave_sigma = 0.0;
  double max_sigma = 0.0;
  std::vector<double> sigma;  // one per missing cell
  std::vector<std::pair<Index, Index>> cells;
  Index repetitions = 0;
  /// Traces of every repetition, in repetition order (empty for methods that
  /// do not report one).
  std::vector<TrainTrace> traces;
};

/// Runs each algorithm `repetitions` times with distinct seeds on the observed
/// part of `synthetic` and reports the population standard deviation of the
/// predictions at every missing cell.
std::vector<VarianceReport> variance_experiment(const std::vector<Algorithm>& algorithms,
                                                const SyntheticData& synthetic, Index repetitions, Index k,
                                                std::uint64_t seed);

/// Convenience overload that generates the synthetic matrix first (range [0, 10]).
std::vector<VarianceReport> variance_experiment(const std::vector<Algorithm>& algorithms, Index n, Index m,
                                                double density, Index repetitions, Index k, std::uint64_t seed);

void write_eval_csv_header(std::ostream& out);
void write_variance_csv_header(std::ostream& out);
void write_variance_row(std::ostream& out, const VarianceReport& r);

}  // namespace mbmf

#endif  // MBMF_EVAL_HPP
