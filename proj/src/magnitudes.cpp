#include "mbmf/magnitudes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace mbmf {

namespace {

MagnitudePair constant_pair(Index n, Index m, double value) {
  if (n == 0 || m == 0) throw DimensionError("magnitude vectors need at least one row and one column");
  MagnitudePair p;
  p.r_w = Vector::Constant(static_cast<Eigen::Index>(n), value);
  p.r_h = Vector::Constant(static_cast<Eigen::Index>(m), value);
  return p;
}

Preprocessed shifted(const SparseObservations& data, double offset, PreprocessRecord rec) {
  std::vector<double> values;
  values.reserve(data.size());
  for (const auto& e : data.entries()) values.push_back(e.value - offset);
  rec.offset_kind = OffsetKind::scalar;
  rec.offset = offset;
  return {data.with_values(values), rec};
}

}  // namespace

Preprocessed center_type1(const SparseObservations& data, double r_min, double r_max) {
  if (!(r_max >= r_min)) throw DataError("r_max must not be below r_min");
  for (const auto& e : data.entries())
    if (e.value < r_min || e.value > r_max)
      throw DataError("value " + std::to_string(e.value) + " at (" + data.row_labels()[e.row] + "," +
                      data.col_labels()[e.col] + ") outside declared range [" + std::to_string(r_min) + ", " +
                      std::to_string(r_max) + "]");
  PreprocessRecord rec;
  rec.variant = Variant::centered;
  rec.data_type = DataType::bounded_both;
  rec.r_min = r_min;
  rec.r_max = r_max;
  return shifted(data, (r_min + r_max) / 2.0, rec);
}

MagnitudePair magnitudes_type1_centered(Index n, Index m, double r_min, double r_max) {
  if (!(r_max > r_min)) throw DataError("r_max must exceed r_min");
  return constant_pair(n, m, std::sqrt((r_max - r_min) / 2.0));
}

Preprocessed shift_nonnegative(const SparseObservations& data, double r_min) {
  PreprocessRecord rec;
  rec.variant = Variant::nonnegative;
  rec.r_min = r_min;
  rec.r_max = data.empty() ? r_min : bounds_type3(data).second;
  return shifted(data, r_min < 0.0 ? r_min : 0.0, rec);
}

MagnitudePair magnitudes_type1_nonneg(Index n, Index m, double r_max) {
  if (!(r_max > 0.0)) throw DataError("r_max must be positive for nonnegative magnitudes");
  return constant_pair(n, m, std::sqrt(r_max));
}

HistoricalStats historical_stats(const SparseObservations& historical, Axis axis, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw DataError("rho must lie in (0, 1]");
  if (historical.empty()) throw DataError("historical data is empty; global statistics are undefined");
  const Index n = axis == Axis::rows ? historical.n_rows() : historical.n_cols();
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  HistoricalStats st;
  st.rho = rho;
  st.count.assign(n, 0);
  double gsum = 0.0;
  for (const auto& e : historical.entries()) {
    const Index i = axis == Axis::rows ? e.row : e.col;
    ++st.count[i];
    sum[i] += e.value;
    gsum += e.value;
  }
  const double total = static_cast<double>(historical.size());
  st.global_mean = gsum / total;
  // Second pass for numerically stable variances.
  std::vector<double> mean(n, 0.0);
  for (Index i = 0; i < n; ++i)
    if (st.count[i]) mean[i] = sum[i] / static_cast<double>(st.count[i]);
  double gss = 0.0;
  for (const auto& e : historical.entries()) {
    const Index i = axis == Axis::rows ? e.row : e.col;
    sum_sq[i] += (e.value - mean[i]) * (e.value - mean[i]);
    gss += (e.value - st.global_mean) * (e.value - st.global_mean);
  }
  st.global_sd = std::sqrt(gss / total);
  st.mean.resize(n);
  st.sd.resize(n);
  for (Index i = 0; i < n; ++i) {
    if (st.count[i] == 0) continue;
    st.mean[i] = mean[i];
    st.sd[i] = std::sqrt(sum_sq[i] / static_cast<double>(st.count[i]));
  }
  return st;
}

Vector historical_magnitudes(const HistoricalStats& stats, Index n_other) {
  if (n_other == 0) throw DimensionError("opposite axis is empty");
  const double global_term = std::sqrt(stats.global_mean + stats.global_sd);
  if (!(global_term > 0.0)) throw DataError("global historical mean + sd must be positive");
  const Index n = stats.count.size();
  Vector r(static_cast<Eigen::Index>(n));
  for (Index i = 0; i < n; ++i) {
    if (stats.count[i] == 0 || !stats.mean[i]) {
      r[static_cast<Eigen::Index>(i)] = global_term;
      continue;
    }
    const double omega =
        std::min(static_cast<double>(stats.count[i]) / (stats.rho * static_cast<double>(n_other)), 1.0);
    const double own = std::sqrt(std::max(*stats.mean[i] + *stats.sd[i], 0.0));
    r[static_cast<Eigen::Index>(i)] = omega * own + (1.0 - omega) * global_term;
  }
  return r;
}

MagnitudePair historical_magnitude_pair(const SparseObservations& historical, double rho) {
  MagnitudePair p;
  p.r_w = historical_magnitudes(historical_stats(historical, Axis::rows, rho), historical.n_cols());
  p.r_h = historical_magnitudes(historical_stats(historical, Axis::cols, rho), historical.n_rows());
  return p;
}

CenteredType2 center_type2(const SparseObservations& data, const MagnitudePair& mags, ContradictionPolicy policy) {
  mags.validate();
  if (static_cast<Index>(mags.r_w.size()) != data.n_rows() || static_cast<Index>(mags.r_h.size()) != data.n_cols())
    throw DimensionError("magnitudes do not match data dimensions");
  CenteredType2 out;
  out.magnitudes = mags;
  const auto entries = data.entries();
  for (Index p = 0; p < entries.size(); ++p) {
    const auto& e = entries[p];
    if (e.value < 0.0) throw DataError("type (ii) centring requires nonnegative observations");
    const double bound = mags.r_w[static_cast<Eigen::Index>(e.row)] * mags.r_h[static_cast<Eigen::Index>(e.col)];
    if (e.value > 2.0 * bound) out.contradictions.push_back({p, e.row, e.col, e.value, bound});
  }
  if (policy == ContradictionPolicy::error && !out.contradictions.empty()) {
    const auto& c = out.contradictions.front();
    throw DataError(std::to_string(out.contradictions.size()) + " observation(s) exceed twice their bound; first at (" +
                    data.row_labels()[c.row] + "," + data.col_labels()[c.col] + "): " + std::to_string(c.value) +
                    " > 2 * " + std::to_string(c.bound));
  }

  std::vector<Index> drop;
  for (const auto& c : out.contradictions) {
    if (policy == ContradictionPolicy::reject_outlier) {
      drop.push_back(c.entry);
    } else {
      // Smallest r_w[row] with value <= 2 r_w[row] r_h[col].
      auto& rw = out.magnitudes.r_w[static_cast<Eigen::Index>(c.row)];
      rw = std::max(rw, c.value / (2.0 * mags.r_h[static_cast<Eigen::Index>(c.col)]));
    }
  }
  const SparseObservations kept = data.without(drop);
  std::vector<double> values;
  values.reserve(kept.size());
  for (const auto& e : kept.entries())
    values.push_back(e.value - out.magnitudes.r_w[static_cast<Eigen::Index>(e.row)] *
                                   out.magnitudes.r_h[static_cast<Eigen::Index>(e.col)]);
  out.data = kept.with_values(values);
  out.record.variant = Variant::centered;
  out.record.data_type = DataType::bounded_one_side;
  out.record.offset_kind = OffsetKind::per_entry_rank1;
  out.record.r_min = 0.0;
  out.record.r_max = data.empty() ? 0.0 : bounds_type3(data).second;
  return out;
}

std::pair<double, double> bounds_type3(const SparseObservations& data) {
  if (data.empty()) throw DataError("bounds of an empty observation set are undefined");
  double lo = data[0].value, hi = data[0].value;
  for (const auto& e : data.entries()) {
    lo = std::min(lo, e.value);
    hi = std::max(hi, e.value);
  }
  return {lo, hi};
}

void write_magnitudes(std::ostream& out, const std::vector<std::string>& labels, const Vector& mags) {
  if (static_cast<Index>(mags.size()) != labels.size()) throw DimensionError("one magnitude per label expected");
  const auto old = out.precision(17);
  for (Index i = 0; i < labels.size(); ++i) out << labels[i] << ',' << mags[static_cast<Eigen::Index>(i)] << '\n';
  out.precision(old);
}

Vector read_magnitudes(std::istream& in, const std::vector<std::string>& labels) {
  std::unordered_map<std::string, Index> pos;
  for (Index i = 0; i < labels.size(); ++i) pos.emplace(labels[i], i);
  Vector out = Vector::Constant(static_cast<Eigen::Index>(labels.size()), std::nan(""));
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw DataError("line " + std::to_string(line_no) + ": expected label,magnitude");
    const std::string label = line.substr(0, comma);
    double value = 0.0;
    const char* b = line.data() + comma + 1;
    const char* e = line.data() + line.size();
    const auto res = std::from_chars(b, e, value);
    if (res.ec != std::errc() || res.ptr != e)
      throw DataError("line " + std::to_string(line_no) + ": non-numeric magnitude");
    const auto it = pos.find(label);
    if (it == pos.end()) continue;  // magnitudes for ids absent from the data are ignored
    if (!std::isnan(out[static_cast<Eigen::Index>(it->second)]))
      throw DataError("line " + std::to_string(line_no) + ": duplicate magnitude for '" + label + "'");
    out[static_cast<Eigen::Index>(it->second)] = value;
  }
  for (Index i = 0; i < labels.size(); ++i)
    if (std::isnan(out[static_cast<Eigen::Index>(i)])) throw DataError("no magnitude given for '" + labels[i] + "'");
  return out;
}

void save_magnitudes(const std::filesystem::path& path, const std::vector<std::string>& labels, const Vector& mags) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_magnitudes(out, labels, mags);
}

Vector load_magnitudes(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_magnitudes(in, labels);
}

}  // namespace mbmf
