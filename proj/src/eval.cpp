#include "mbmf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "mbmf/baselines.hpp"
#include "mbmf/magnitudes.hpp"
#include "mbmf/random.hpp"

namespace mbmf {

namespace {

void check_mask(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions) {
  if (mask.size() != predictions.size()) throw DimensionError("one prediction per masked entry expected");
  for (Index i : mask)
    if (i >= truth.size()) throw DimensionError("mask index out of range");
}

struct SetCounts {
  Index both = 0, truth = 0, predicted = 0;
};

double f1_from(const SetCounts& c) {
  if (c.truth == 0 && c.predicted == 0) return 100.0;  // identical (empty) recommendation sets
  const double precision = c.predicted ? static_cast<double>(c.both) / static_cast<double>(c.predicted) : 0.0;
  const double recall = c.truth ? static_cast<double>(c.both) / static_cast<double>(c.truth) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double rmse(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions) {
  check_mask(truth, mask, predictions);
  if (mask.empty()) throw DataError("empty evaluation mask");
  double ss = 0.0;
  for (Index p = 0; p < mask.size(); ++p) {
    const double d = truth[mask[p]].value - predictions[p];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(mask.size()));
}

double mae(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions) {
  check_mask(truth, mask, predictions);
  if (mask.empty()) throw DataError("empty evaluation mask");
  double s = 0.0;
  for (Index p = 0; p < mask.size(); ++p) s += std::abs(truth[mask[p]].value - predictions[p]);
  return s / static_cast<double>(mask.size());
}

double f1_score(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions,
                F1Aggregation aggregation) {
  check_mask(truth, mask, predictions);
  // Group masked positions by user.
  std::map<Index, std::vector<Index>> by_user;
  for (Index p = 0; p < mask.size(); ++p) by_user[truth[mask[p]].row].push_back(p);

  SetCounts pooled;
  double macro_sum = 0.0;
  for (const auto& [user, positions] : by_user) {
    double truth_mean = 0.0, pred_mean = 0.0;
    for (Index p : positions) {
      truth_mean += truth[mask[p]].value;
      pred_mean += predictions[p];
    }
    truth_mean /= static_cast<double>(positions.size());
    pred_mean /= static_cast<double>(positions.size());
    SetCounts c;
    for (Index p : positions) {
      const bool t = truth[mask[p]].value > truth_mean;
      const bool y = predictions[p] > pred_mean;
      c.truth += t;
      c.predicted += y;
      c.both += t && y;
    }
    pooled.both += c.both;
    pooled.truth += c.truth;
    pooled.predicted += c.predicted;
    macro_sum += f1_from(c);
  }
  if (by_user.empty()) throw DataError("empty evaluation mask");
  if (aggregation == F1Aggregation::micro) return f1_from(pooled);
  return macro_sum / static_cast<double>(by_user.size());
}

EvalReport evaluate(const SparseObservations& truth, std::span<const Index> mask, std::span<const double> predictions,
                    F1Aggregation aggregation) {
  return {rmse(truth, mask, predictions), mae(truth, mask, predictions),
          f1_score(truth, mask, predictions, aggregation), mask.size()};
}

SyntheticData generate_synthetic(Index n, Index m, std::pair<double, double> value_range, double density,
                                 std::uint64_t seed) {
  const auto [lo, hi] = value_range;
  if (n == 0 || m == 0) throw DataError("synthetic matrix needs at least one row and column");
  if (!(density > 0.0 && density <= 1.0)) throw DataError("density must lie in (0, 1]");
  if (!(hi > lo)) throw DataError("value range must have hi > lo");
  const Index cells = n * m;
  const auto target = static_cast<Index>(std::ceil(density * static_cast<double>(cells) - 1e-9));
  if (target < std::max(n, m))
    throw DataError("density " + std::to_string(density) + " keeps " + std::to_string(target) +
                    " cells, fewer than needed to cover every row and column");

  auto value_rng = substream(seed, "synth-values");
  std::vector<double> raw(cells);
  for (auto& v : raw) v = uniform(value_rng, 0.0, 1.0);
  const auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
  const double rmin = *mn, rspan = *mx - *mn;
  for (auto& v : raw) v = rspan > 0.0 ? lo + (hi - lo) * (v - rmin) / rspan : lo;

  auto mask_rng = substream(seed, "synth-mask");
  std::vector<Index> order(cells);
  for (Index c = 0; c < cells; ++c) order[c] = c;
  shuffle(order.begin(), order.end(), mask_rng);
  std::vector<bool> kept(cells, false);
  std::vector<Index> row_count(n, 0), col_count(m, 0);
  for (Index t = 0; t < target; ++t) {
    kept[order[t]] = true;
    ++row_count[order[t] / m];
    ++col_count[order[t] % m];
  }

  // Repair empty rows/columns: add a random cell of the empty line and drop
  // the most recently drawn kept cell whose row and column both have spares.
  Index drop_cursor = target;
  auto swap_in = [&](Index cell) {
    while (drop_cursor > 0) {
      const Index c = order[--drop_cursor];
      if (kept[c] && row_count[c / m] >= 2 && col_count[c % m] >= 2 && c / m != cell / m && c % m != cell % m) {
        kept[c] = false;
        --row_count[c / m];
        --col_count[c % m];
        break;
      }
    }
    kept[cell] = true;
    ++row_count[cell / m];
    ++col_count[cell % m];
  };
  for (Index r = 0; r < n; ++r)
    if (row_count[r] == 0) swap_in(r * m + uniform_index(mask_rng, m));
  for (Index c = 0; c < m; ++c)
    if (col_count[c] == 0) swap_in(uniform_index(mask_rng, n) * m + c);

  std::vector<Entry> full, observed;
  SyntheticData out;
  full.reserve(cells);
  for (Index c = 0; c < cells; ++c) {
    const Entry e{c / m, c % m, raw[c]};
    full.push_back(e);
    if (kept[c])
      observed.push_back(e);
    else
      out.missing.emplace_back(e.row, e.col);
  }
  out.full = SparseObservations(n, m, std::move(full));
  out.observed = SparseObservations(n, m, std::move(observed));
  return out;
}

Algorithm make_algorithm(const std::string& name, const TrainConfig& base, std::pair<double, double> value_range) {
  const auto [lo, hi] = value_range;
  using Cells = std::span<const std::pair<Index, Index>>;
  if (name == "mf" || name == "nmf") {
    const bool nmf = name == "nmf";
    return {name, [base, nmf](const SparseObservations& obs, Index k, std::uint64_t seed, Cells cells) {
              TrainConfig cfg = base;
              cfg.k = k;
              cfg.seed = seed;
              auto res = nmf ? train_nmf(obs, k, cfg) : train_mf(obs, k, cfg);
              return AlgorithmOutput{predict(res.model, cells), std::move(res.trace)};
            }};
  }
  if (name == "mbmf-n") {
    return {name, [base, lo, hi](const SparseObservations& obs, Index k, std::uint64_t seed, Cells cells) {
              TrainConfig cfg = base;
              cfg.k = k;
              cfg.seed = seed;
              cfg.variant = Variant::nonnegative;
              auto pre = shift_nonnegative(obs, lo);
              const double top = hi - pre.record.offset;
              auto mags = magnitudes_type1_nonneg(obs.n_rows(), obs.n_cols(), top);
              auto res = train(pre.data, mags, cfg);
              res.model.preprocess = pre.record;
              return AlgorithmOutput{predict(res.model, cells), std::move(res.trace)};
            }};
  }
  if (name == "mbmf-c") {
    return {name, [base, lo, hi](const SparseObservations& obs, Index k, std::uint64_t seed, Cells cells) {
              TrainConfig cfg = base;
              cfg.k = k;
              cfg.seed = seed;
              cfg.variant = Variant::centered;
              auto pre = center_type1(obs, lo, hi);
              auto mags = magnitudes_type1_centered(obs.n_rows(), obs.n_cols(), lo, hi);
              auto res = train(pre.data, mags, cfg);
              res.model.preprocess = pre.record;
              return AlgorithmOutput{predict(res.model, cells), std::move(res.trace)};
            }};
  }
  if (name == "constant") {
    return {name, [](const SparseObservations& obs, Index, std::uint64_t, Cells cells) {
              double mean = 0.0;
              for (const auto& e : obs.entries()) mean += e.value;
              mean /= static_cast<double>(std::max<Index>(obs.size(), 1));
              return AlgorithmOutput{std::vector<double>(cells.size(), mean), std::nullopt};
            }};
  }
  throw DataError("unknown algorithm '" + name + "' (expected mf, nmf, mbmf-n, mbmf-c or constant)");
}

std::vector<VarianceReport> variance_experiment(const std::vector<Algorithm>& algorithms,
                                                const SyntheticData& synthetic, Index repetitions, Index k,
                                                std::uint64_t seed) {
  if (repetitions < 1) throw DataError("need at least one repetition");
  const auto& cells = synthetic.missing;
  std::vector<VarianceReport> reports;
  for (const auto& alg : algorithms) {
    VarianceReport rep;
    rep.algorithm = alg.name;
    rep.k = k;
    rep.repetitions = repetitions;
    rep.cells = cells;
    std::vector<double> sum(cells.size(), 0.0), sum_sq(cells.size(), 0.0);
    std::vector<std::vector<double>> runs;
    auto seeds = substream(seed, "repetitions");
    for (Index r = 0; r < repetitions; ++r) {
      auto out = alg.run(synthetic.observed, k, seeds(), cells);
      if (out.predictions.size() != cells.size()) throw DimensionError(alg.name + " returned the wrong count");
      if (out.trace) rep.traces.push_back(std::move(*out.trace));
      runs.push_back(std::move(out.predictions));
    }
    rep.sigma.resize(cells.size());
    double total = 0.0;
    for (Index c = 0; c < cells.size(); ++c) {
      double mean = 0.0;
      for (const auto& run : runs) mean += run[c];
      mean /= static_cast<double>(repetitions);
      double ss = 0.0;
      for (const auto& run : runs) ss += (run[c] - mean) * (run[c] - mean);
      rep.sigma[c] = std::sqrt(ss / static_cast<double>(repetitions));
      total += rep.sigma[c];
      rep.max_sigma = std::max(rep.max_sigma, rep.sigma[c]);
    }
    rep.ave_sigma = cells.empty() ? 0.0 : total / static_cast<double>(cells.size());
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::vector<VarianceReport> variance_experiment(const std::vector<Algorithm>& algorithms, Index n, Index m,
                                                double density, Index repetitions, Index k, std::uint64_t seed) {
  return variance_experiment(algorithms, generate_synthetic(n, m, {0.0, 10.0}, density, seed), repetitions, k, seed);
}

void write_eval_csv_header(std::ostream& out) { out << "algorithm,K,rmse,mae,f1,fold\n"; }

void write_variance_csv_header(std::ostream& out) { out << "algorithm,K,ave_sigma,max_sigma\n"; }

void write_variance_row(std::ostream& out, const VarianceReport& r) {
  const auto old = out.precision(17);
  out << r.algorithm << ',' << r.k << ',' << r.ave_sigma << ',' << r.max_sigma << '\n';
  out.precision(old);
}

}  // namespace mbmf
