#include "mbmf/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mbmf/random.hpp"

namespace mbmf {

namespace {

std::vector<std::string> index_labels(Index n) {
  std::vector<std::string> labels(n);
  for (Index i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

// Dense id assignment in first-seen order.
class LabelMap {
 public:
  Index get(std::string_view key) {
    auto [it, inserted] = ids_.try_emplace(std::string(key), labels_.size());
    if (inserted) labels_.emplace_back(key);
    return it->second;
  }
  std::vector<std::string> take() { return std::move(labels_); }
  Index size() const { return labels_.size(); }

 private:
  std::unordered_map<std::string, Index> ids_;
  std::vector<std::string> labels_;
};

std::uint64_t pair_key(Index r, Index c) { return (static_cast<std::uint64_t>(r) << 32) ^ static_cast<std::uint64_t>(c); }

}  // namespace

SparseObservations::SparseObservations(Index n_rows, Index n_cols, std::vector<Entry> entries,
                                       std::vector<std::string> row_labels, std::vector<std::string> col_labels)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      entries_(std::move(entries)),
      row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)) {
  if (row_labels_.empty()) row_labels_ = index_labels(n_rows_);
  if (col_labels_.empty()) col_labels_ = index_labels(n_cols_);
  if (row_labels_.size() != n_rows_ || col_labels_.size() != n_cols_)
    throw DimensionError("label count does not match matrix dimensions");
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (e.row >= n_rows_ || e.col >= n_cols_)
      throw DataError("entry (" + std::to_string(e.row) + "," + std::to_string(e.col) + ") out of range");
    if (!seen.insert(pair_key(e.row, e.col)).second)
      throw DataError("duplicate entry (" + std::to_string(e.row) + "," + std::to_string(e.col) + ")");
  }
}

SparseObservations SparseObservations::subset(std::span<const Index> indices) const {
  std::vector<Entry> out;
  out.reserve(indices.size());
  for (Index i : indices) out.push_back(entries_.at(i));
  return SparseObservations(n_rows_, n_cols_, std::move(out), row_labels_, col_labels_);
}

SparseObservations SparseObservations::without(std::span<const Index> indices) const {
  std::vector<bool> drop(entries_.size(), false);
  for (Index i : indices) drop.at(i) = true;
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (Index i = 0; i < entries_.size(); ++i)
    if (!drop[i]) out.push_back(entries_[i]);
  return SparseObservations(n_rows_, n_cols_, std::move(out), row_labels_, col_labels_);
}

SparseObservations SparseObservations::with_values(std::span<const double> values) const {
  if (values.size() != entries_.size()) throw DimensionError("value count does not match entry count");
  std::vector<Entry> out(entries_);
  for (Index i = 0; i < out.size(); ++i) out[i].value = values[i];
  return SparseObservations(n_rows_, n_cols_, std::move(out), row_labels_, col_labels_);
}

std::vector<Index> SparseObservations::row_counts() const {
  std::vector<Index> c(n_rows_, 0);
  for (const auto& e : entries_) ++c[e.row];
  return c;
}

std::vector<Index> SparseObservations::col_counts() const {
  std::vector<Index> c(n_cols_, 0);
  for (const auto& e : entries_) ++c[e.col];
  return c;
}

ObservationIndex build_index(const SparseObservations& data) {
  ObservationIndex idx;
  const auto entries = data.entries();
  auto fill = [&](Index n, auto key, auto minor, std::vector<Index>& ptr, std::vector<Index>& list,
                  std::vector<Index>& minors) {
    ptr.assign(n + 1, 0);
    for (const auto& e : entries) ++ptr[key(e) + 1];
    std::partial_sum(ptr.begin(), ptr.end(), ptr.begin());
    list.resize(entries.size());
    std::vector<Index> cursor(ptr.begin(), ptr.end() - 1);
    for (Index i = 0; i < entries.size(); ++i) list[cursor[key(entries[i])]++] = i;
    for (Index r = 0; r < n; ++r)
      std::sort(list.begin() + static_cast<std::ptrdiff_t>(ptr[r]), list.begin() + static_cast<std::ptrdiff_t>(ptr[r + 1]),
                [&](Index a, Index b) { return minor(entries[a]) < minor(entries[b]); });
    minors.resize(list.size());
    for (Index p = 0; p < list.size(); ++p) minors[p] = minor(entries[list[p]]);
  };
  fill(data.n_rows(), [](const Entry& e) { return e.row; }, [](const Entry& e) { return e.col; }, idx.row_ptr,
       idx.row_entries, idx.row_minor);
  fill(data.n_cols(), [](const Entry& e) { return e.col; }, [](const Entry& e) { return e.row; }, idx.col_ptr,
       idx.col_entries, idx.col_minor);
  return idx;
}

SparseObservations parse_triplets(std::istream& in, TripletOptions opts) {
  LabelMap rows, cols;
  std::vector<Entry> entries;
  std::unordered_map<std::uint64_t, Index> first_line;
  std::string line;
  Index line_no = 0;
  bool header_pending = opts.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split_fields(t, opts.delimiter);
    if (fields.size() < 3 || fields[0].empty() || fields[1].empty())
      throw DataError("line " + std::to_string(line_no) + ": expected user, item, value");
    double value = 0.0;
    if (!parse_double(fields[2], value))
      throw DataError("line " + std::to_string(line_no) + ": non-numeric value '" + std::string(fields[2]) + "'");
    const Index r = rows.get(fields[0]);
    const Index c = cols.get(fields[1]);
    auto [it, inserted] = first_line.try_emplace(pair_key(r, c), line_no);
    if (!inserted)
      throw DataError("line " + std::to_string(line_no) + ": duplicate pair (" + std::string(fields[0]) + "," +
                      std::string(fields[1]) + "), first seen on line " + std::to_string(it->second));
    entries.push_back({r, c, value});
  }
  if (entries.empty()) throw DataError("no entries");
  const Index n = rows.size(), m = cols.size();
  return SparseObservations(n, m, std::move(entries), rows.take(), cols.take());
}

SparseObservations load_triplets(const std::filesystem::path& path, TripletOptions opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_triplets(in, opts);
}

void write_triplets(std::ostream& out, const SparseObservations& data, char delimiter) {
  const auto old = out.precision(17);
  for (const auto& e : data.entries())
    out << data.row_labels()[e.row] << delimiter << data.col_labels()[e.col] << delimiter << e.value << '\n';
  out.precision(old);
}

void save_triplets(const std::filesystem::path& path, const SparseObservations& data, char delimiter) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_triplets(out, data, delimiter);
}

SplitPlan split_historical_present(const SparseObservations& data, std::uint64_t seed) {
  if (data.empty()) throw DataError("cannot split an empty observation set");
  const Index n = data.size();
  const auto entries = data.entries();

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  auto rng = substream(seed, "split");
  shuffle(order.begin(), order.end(), rng);

  const Index target_hist = n / 2;
  std::vector<bool> present(n, false);
  for (Index k = target_hist; k < n; ++k) present[order[k]] = true;

  std::vector<Index> row_present(data.n_rows(), 0), col_present(data.n_cols(), 0);
  for (Index i = 0; i < n; ++i)
    if (present[i]) {
      ++row_present[entries[i].row];
      ++col_present[entries[i].col];
    }

  // Last historical entry (by index) of each row and column.
  std::vector<Index> last_in_row(data.n_rows(), n), last_in_col(data.n_cols(), n);
  Index forced = 0;
  auto move_to_present = [&](Index i) {
    present[i] = true;
    ++row_present[entries[i].row];
    ++col_present[entries[i].col];
    ++forced;
  };
  for (Index i = 0; i < n; ++i)
    if (!present[i]) last_in_row[entries[i].row] = i;
  for (Index r = 0; r < data.n_rows(); ++r)
    if (row_present[r] == 0 && last_in_row[r] != n) move_to_present(last_in_row[r]);
  for (Index i = 0; i < n; ++i)
    if (!present[i]) last_in_col[entries[i].col] = i;
  for (Index c = 0; c < data.n_cols(); ++c)
    if (col_present[c] == 0 && last_in_col[c] != n) move_to_present(last_in_col[c]);

  // Restore the 50/50 balance where coverage allows, scanning the shuffled
  // present tail from its end.
  Index hist_count = static_cast<Index>(std::count(present.begin(), present.end(), false));
  for (Index k = n; k-- > target_hist && hist_count < target_hist;) {
    const Index i = order[k];
    const auto& e = entries[i];
    if (present[i] && row_present[e.row] >= 2 && col_present[e.col] >= 2) {
      present[i] = false;
      --row_present[e.row];
      --col_present[e.col];
      ++hist_count;
    }
  }

  std::vector<Index> hist_idx, pres_idx;
  for (Index i = 0; i < n; ++i) (present[i] ? pres_idx : hist_idx).push_back(i);
  SplitPlan plan;
  plan.historical = data.subset(hist_idx);
  plan.present = data.subset(pres_idx);
  plan.forced_moves = forced;
  return plan;
}

std::vector<std::vector<Index>> make_validation_folds(const SparseObservations& present, Index n_folds,
                                                      double fraction, std::uint64_t seed, FoldSampling sampling) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("fold fraction must lie in (0, 1)");
  if (n_folds < 1) throw DataError("need at least one fold");
  if (sampling == FoldSampling::disjoint && static_cast<double>(n_folds) * fraction > 1.0 + 1e-12)
    throw DataError("n_folds * fraction exceeds 1; disjoint folds are infeasible");
  const Index n = present.size();
  const auto fold_size = static_cast<Index>(std::floor(fraction * static_cast<double>(n)));
  if (fold_size == 0) throw DataError("fold would be empty");

  auto rng = substream(seed, "folds");
  std::vector<Index> order(n);
  std::vector<std::vector<Index>> folds(n_folds);
  std::iota(order.begin(), order.end(), Index{0});
  shuffle(order.begin(), order.end(), rng);
  for (Index f = 0; f < n_folds; ++f) {
    if (sampling == FoldSampling::independent && f > 0) {
      std::iota(order.begin(), order.end(), Index{0});
      shuffle(order.begin(), order.end(), rng);
    }
    const Index start = sampling == FoldSampling::disjoint ? f * fold_size : 0;
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                    order.begin() + static_cast<std::ptrdiff_t>(start + fold_size));
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

void write_fold_manifest(std::ostream& out, const std::vector<std::vector<Index>>& folds) {
  for (const auto& fold : folds) {
    for (Index i = 0; i < fold.size(); ++i) out << (i ? " " : "") << fold[i];
    out << '\n';
  }
}

std::vector<std::vector<Index>> read_fold_manifest(std::istream& in) {
  std::vector<std::vector<Index>> folds;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::vector<Index> fold;
    Index v;
    while (ls >> v) fold.push_back(v);
    if (!ls.eof()) throw DataError("malformed fold manifest line: " + line);
    folds.push_back(std::move(fold));
  }
  return folds;
}

Behavior parse_behavior(const std::string& s) {
  if (s == "click") return Behavior::click;
  if (s == "collect") return Behavior::collect;
  if (s == "cart") return Behavior::add_to_cart;
  if (s == "pay") return Behavior::payment;
  throw DataError("unknown behaviour '" + s + "' (expected click, collect, cart or pay)");
}

BehaviorLog parse_behavior_log(std::istream& in, char delimiter, bool has_header) {
  BehaviorLog log;
  std::string line;
  Index line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split_fields(t, delimiter);
    if (fields.size() < 3 || fields[0].empty() || fields[1].empty())
      throw DataError("line " + std::to_string(line_no) + ": expected user, category, behaviour");
    try {
      log.records.push_back({std::string(fields[0]), std::string(fields[1]), parse_behavior(std::string(fields[2]))});
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

BehaviorLog load_behavior_log(const std::filesystem::path& path, char delimiter, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_behavior_log(in, delimiter, has_header);
}

SparseObservations behaviors_to_interest(const BehaviorLog& log, std::array<double, 4> weights) {
  for (double w : weights)
    if (!(w >= 0.0)) throw DataError("behaviour weights must be nonnegative");
  LabelMap users, cats;
  // (user, category) -> counts per behaviour, in first-seen pair order.
  std::map<std::pair<Index, Index>, Index> slot;
  std::vector<std::pair<Index, Index>> pairs;
  std::vector<std::array<Index, 4>> counts;
  for (const auto& rec : log.records) {
    const Index u = users.get(rec.user);
    const Index c = cats.get(rec.category);
    auto [it, inserted] = slot.try_emplace({u, c}, pairs.size());
    if (inserted) {
      pairs.emplace_back(u, c);
      counts.push_back({0, 0, 0, 0});
    }
    ++counts[it->second][static_cast<std::size_t>(rec.behavior)];
  }
  std::vector<Entry> entries;
  entries.reserve(pairs.size());
  for (Index k = 0; k < pairs.size(); ++k) {
    double p = 0.0;
    for (std::size_t b = 0; b < 4; ++b) p += weights[b] * static_cast<double>(counts[k][b]);
    entries.push_back({pairs[k].first, pairs[k].second, p});
  }
  const Index n = users.size(), m = cats.size();
  return SparseObservations(n, m, std::move(entries), users.take(), cats.take());
}

}  // namespace mbmf
