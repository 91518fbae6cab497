#ifndef MBMF_DATA_HPP
#define MBMF_DATA_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mbmf/types.hpp"

namespace mbmf {

struct Entry {
  Index row = 0;
  Index col = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse observation matrix V. The indicator Z is implicit: Z_ij = 1 exactly
/// where an entry exists. Immutable after construction.
class SparseObservations {
 public:
  SparseObservations() = default;

  /// Validates bounds and rejects duplicate (row, col) pairs. Empty label
  /// vectors are filled with the decimal index.
  SparseObservations(Index n_rows, Index n_cols, std::vector<Entry> entries,
                     std::vector<std::string> row_labels = {}, std::vector<std::string> col_labels = {});

  Index n_rows() const { return n_rows_; }
  Index n_cols() const { return n_cols_; }
  Index size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::span<const Entry> entries() const { return entries_; }
  const Entry& operator[](Index i) const { return entries_[i]; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }

  /// Same dimensions and labels, only the listed entries (in the given order).
  SparseObservations subset(std::span<const Index> indices) const;
  /// Same dimensions and labels, every entry except the listed ones.
  SparseObservations without(std::span<const Index> indices) const;
  /// Same shape and labels, new values (one per entry, same order).
  SparseObservations with_values(std::span<const double> values) const;

  /// Entries per row / per column.
  std::vector<Index> row_counts() const;
  std::vector<Index> col_counts() const;

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
};

/// Row- and column-compressed views of the entry list, used by the kernels.
/// Each pointer array indexes into the corresponding list of entry positions;
/// positions within a row (column) are sorted by column (row). The *_minor
/// arrays hold that column (row) for each list position.
struct ObservationIndex {
  std::vector<Index> row_ptr;
  std::vector<Index> row_entries;
  std::vector<Index> row_minor;
  std::vector<Index> col_ptr;
  std::vector<Index> col_entries;
  std::vector<Index> col_minor;
};

ObservationIndex build_index(const SparseObservations& data);

struct SplitPlan {
  SparseObservations historical;
  SparseObservations present;
  std::vector<std::vector<Index>> folds;
  /// Entries moved into present to satisfy the coverage constraint.
  Index forced_moves = 0;
};

enum class Behavior { click, collect, add_to_cart, payment };

struct BehaviorRecord {
  std::string user;
  std::string category;
  Behavior behavior = Behavior::click;
};

struct BehaviorLog {
  std::vector<BehaviorRecord> records;
};

struct TripletOptions {
  char delimiter = ',';
  bool has_header = false;
};

/// Reads `user,item,value` lines. External ids are mapped to dense indices in
/// first-seen order. Lines starting with '#' and blank lines are skipped.
SparseObservations load_triplets(const std::filesystem::path& path, TripletOptions opts = {});
SparseObservations parse_triplets(std::istream& in, TripletOptions opts = {});
/// Writes entries as `row_label,col_label,value` with 17 significant digits.
void write_triplets(std::ostream& out, const SparseObservations& data, char delimiter = ',');
void save_triplets(const std::filesystem::path& path, const SparseObservations& data, char delimiter = ',');

/// Random 50/50 split, repaired so that present has an entry in every row
/// and column that has any entry overall.
SplitPlan split_historical_present(const SparseObservations& data, std::uint64_t seed);

enum class FoldSampling { disjoint, independent };

std::vector<std::vector<Index>> make_validation_folds(const SparseObservations& present, Index n_folds,
                                                      double fraction, std::uint64_t seed,
                                                      FoldSampling sampling = FoldSampling::disjoint);

void write_fold_manifest(std::ostream& out, const std::vector<std::vector<Index>>& folds);
std::vector<std::vector<Index>> read_fold_manifest(std::istream& in);

Behavior parse_behavior(const std::string& s);
BehaviorLog parse_behavior_log(std::istream& in, char delimiter = ',', bool has_header = false);
BehaviorLog load_behavior_log(const std::filesystem::path& path, char delimiter = ',', bool has_header = false);

/// Interest value per (user, category): weighted sum of behaviour counts in
/// the order click, collect, add-to-cart, payment.
SparseObservations behaviors_to_interest(const BehaviorLog& log, std::array<double, 4> weights = {1.0, 2.0, 3.0, 5.0});

}  // namespace mbmf

#endif  // MBMF_DATA_HPP
