#ifndef MBMF_MAGNITUDES_HPP
#define MBMF_MAGNITUDES_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "mbmf/data.hpp"
#include "mbmf/types.hpp"

namespace mbmf {

/// Observations after preprocessing plus the record needed to undo it.
struct Preprocessed {
  SparseObservations data;
  PreprocessRecord record;
};

/// Shift bounded data by -(r_min + r_max) / 2 so it is symmetric about zero.
/// Throws DataError if an observed value lies outside [r_min, r_max].
Preprocessed center_type1(const SparseObservations& data, double r_min, double r_max);

/// Every magnitude sqrt((r_max - r_min) / 2).
MagnitudePair magnitudes_type1_centered(Index n, Index m, double r_min, double r_max);

/// Shift by -r_min when r_min < 0; identity otherwise.
Preprocessed shift_nonnegative(const SparseObservations& data, double r_min);

/// Every magnitude sqrt(r_max).
MagnitudePair magnitudes_type1_nonneg(Index n, Index m, double r_max);

/// Mean / standard deviation summaries of historical data along one axis
/// (rows for user magnitudes, columns for item magnitudes).
struct HistoricalStats {
  std::vector<std::optional<double>> mean;  // nullopt: no historical data
  std::vector<std::optional<double>> sd;
  std::vector<Index> count;
  double global_mean = 0.0;
  double global_sd = 0.0;
  double rho = 0.05;
};

enum class Axis { rows, cols };

/// Population statistics of the historical entries along `axis`.
/// Throws DataError when the history is empty.
HistoricalStats historical_stats(const SparseObservations& historical, Axis axis, double rho = 0.05);

/// r_i = w_i sqrt(mean_i + sd_i) + (1 - w_i) sqrt(global_mean + global_sd),
/// w_i = min(count_i / (rho * n_other), 1) and w_i = 0 without history.
/// n_other is the size of the opposite axis (items for user magnitudes).
Vector historical_magnitudes(const HistoricalStats& stats, Index n_other);

/// Both magnitude vectors from the historical part of a split.
MagnitudePair historical_magnitude_pair(const SparseObservations& historical, double rho = 0.05);

enum class ContradictionPolicy { reject_outlier, raise_magnitude, error };

struct Contradiction {
  Index entry = 0;  // position in the input data
  Index row = 0;
  Index col = 0;
  double value = 0.0;
  double bound = 0.0;  // r_w[row] * r_h[col] before any adjustment
};

struct CenteredType2 {
  SparseObservations data;
  PreprocessRecord record;
  MagnitudePair magnitudes;  // possibly raised
  std::vector<Contradiction> contradictions;
};

/// V_ij - r_w[i] r_h[j], with observations above 2 r_w[i] r_h[j] handled per
/// policy. Throws DataError for negative input, or for policy `error` when any
/// contradiction exists.
CenteredType2 center_type2(const SparseObservations& data, const MagnitudePair& mags,
                           ContradictionPolicy policy = ContradictionPolicy::raise_magnitude);

/// Observed (min, max); the bounds assumed for unbounded data.
std::pair<double, double> bounds_type3(const SparseObservations& data);

/// `label,magnitude` lines, one per row (or column) in label order.
void write_magnitudes(std::ostream& out, const std::vector<std::string>& labels, const Vector& mags);
/// Reads `label,magnitude` lines and orders them by `labels`. Every label must
/// be present exactly once.
Vector read_magnitudes(std::istream& in, const std::vector<std::string>& labels);
void save_magnitudes(const std::filesystem::path& path, const std::vector<std::string>& labels, const Vector& mags);
Vector load_magnitudes(const std::filesystem::path& path, const std::vector<std::string>& labels);

}  // namespace mbmf

#endif  // MBMF_MAGNITUDES_HPP
