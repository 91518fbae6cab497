#include "mbmf/commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "mbmf/baselines.hpp"
#include "mbmf/data.hpp"
#include "mbmf/eval.hpp"
#include "mbmf/magnitudes.hpp"
#include "mbmf/model_io.hpp"
#include "mbmf/optimizer.hpp"
#include "mbmf/random.hpp"

namespace mbmf::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "10,20,50" -> {10, 20, 50}. Every K must be an integer >= 2.
std::vector<Index> parse_k_list(const std::string& text, const char* flag) {
  std::vector<Index> ks;
  std::istringstream in(text);
  for (std::string tok; std::getline(in, tok, ',');) {
    Index k = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), k);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size() || k < 2)
      throw UsageError(std::string(flag) + ": '" + tok + "' is not a latent dimension >= 2");
    ks.push_back(k);
  }
  if (ks.empty()) throw UsageError(std::string(flag) + " needs at least one value");
  return ks;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("mbmf", sink);
  log->set_pattern("[%l] %v");
  log->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MBMF_LOG")) {
    const std::string v = env;
    if (v == "0" || v == "off") log->set_level(spdlog::level::off);
    else if (v == "1" || v == "info") log->set_level(spdlog::level::info);
    else if (v == "2" || v == "debug") log->set_level(spdlog::level::debug);
    else log->set_level(spdlog::level::from_str(v));
  }
  return log;
}

// Flags shared by the commands that train models.
struct TrainFlags {
  Index k = 10;
  std::string variant = "n";
  std::string magnitudes = "type1";
  double rho = 0.05;
  std::uint64_t seed = 0;
  Index max_iters = 500;
  double tol = 1e-5;
  double lr = 0.1;
  std::optional<double> range_min;
  std::optional<double> range_max;
  std::string policy = "raise_magnitude";
  std::string history;
  char delimiter = ',';
  bool header = false;

  TrainConfig config() const {
    TrainConfig cfg;
    cfg.k = k;
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    cfg.lr_phi = cfg.lr_theta = lr;
    cfg.seed = seed;
    cfg.variant = parse_variant(variant);
    return cfg;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_k) {
  if (with_k)
    cmd->add_option("--k", f.k, "Latent dimension (>= 2)")->check(CLI::Range(Index{2}, Index{1} << 20));
  cmd->add_option("--variant", f.variant, "c (centred) or n (nonnegative)")->check(CLI::IsMember({"c", "n"}));
  cmd->add_option("--magnitudes", f.magnitudes, "type1 | historical | file:<prefix>");
  cmd->add_option("--rho", f.rho, "Historical share needed for full self-weight")->check(CLI::Range(1e-12, 1.0));
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "Early-stop decrease threshold")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", f.lr, "Initial step size for both angle matrices")->check(CLI::PositiveNumber);
  cmd->add_option("--range-min", f.range_min, "Declared lower bound of the data (type1)");
  cmd->add_option("--range-max", f.range_max, "Declared upper bound of the data (type1)");
  cmd->add_option("--policy", f.policy, "Contradiction policy for type (ii) centring")
      ->check(CLI::IsMember({"reject_outlier", "raise_magnitude", "error"}));
  cmd->add_option("--history", f.history, "Historical triplets for --magnitudes historical")
      ->check(CLI::ExistingFile);
  cmd->add_option("--delimiter", f.delimiter, "Field delimiter");
  cmd->add_flag("--header", f.header, "Input files start with a header line");
}

ContradictionPolicy parse_policy(const std::string& s) {
  if (s == "reject_outlier") return ContradictionPolicy::reject_outlier;
  if (s == "error") return ContradictionPolicy::error;
  return ContradictionPolicy::raise_magnitude;
}

/// Training data and magnitudes after the chosen preprocessing.
struct Prepared {
  SparseObservations data;
  MagnitudePair magnitudes;
  PreprocessRecord record;
};

// `history` supplies historical statistics when the magnitude source is
// "historical"; `full` supplies the observed range when no range is declared.
Prepared prepare(const SparseObservations& train_view, const SparseObservations& full,
                 const SparseObservations* history, const TrainFlags& f, spdlog::logger& log) {
  const Variant variant = parse_variant(f.variant);
  Prepared p;
  if (f.magnitudes == "type1") {
    const auto observed = bounds_type3(full);
    const double lo = f.range_min.value_or(observed.first);
    const double hi = f.range_max.value_or(observed.second);
    if (!f.range_min || !f.range_max) log.info("range not declared; using observed bounds [{}, {}]", lo, hi);
    if (variant == Variant::centered) {
      auto pre = center_type1(train_view, lo, hi);
      p = {std::move(pre.data), magnitudes_type1_centered(full.n_rows(), full.n_cols(), lo, hi), pre.record};
    } else {
      auto pre = shift_nonnegative(train_view, lo);
      pre.record.r_min = lo;
      pre.record.r_max = hi;
      p = {std::move(pre.data), magnitudes_type1_nonneg(full.n_rows(), full.n_cols(), hi - pre.record.offset),
           pre.record};
    }
    return p;
  }

  MagnitudePair mags;
  if (f.magnitudes == "historical") {
    if (history == nullptr) throw UsageError("--magnitudes historical needs historical data");
    mags = historical_magnitude_pair(*history, f.rho);
  } else if (f.magnitudes.starts_with("file:")) {
    const std::string prefix = f.magnitudes.substr(5);
    mags.r_w = load_magnitudes(prefix + ".users.csv", full.row_labels());
    mags.r_h = load_magnitudes(prefix + ".items.csv", full.col_labels());
    mags.validate();
  } else {
    throw UsageError("--magnitudes must be type1, historical or file:<prefix>");
  }

  if (variant == Variant::centered) {
    auto c = center_type2(train_view, mags, parse_policy(f.policy));
    if (!c.contradictions.empty())
      log.warn("{} observation(s) exceeded twice their magnitude bound ({})", c.contradictions.size(), f.policy);
    return {std::move(c.data), std::move(c.magnitudes), c.record};
  }
  for (const auto& e : train_view.entries())
    if (e.value < 0.0) throw DataError("variant n with non-type1 magnitudes needs nonnegative data");
  PreprocessRecord rec;
  rec.variant = Variant::nonnegative;
  rec.data_type = DataType::bounded_one_side;
  const auto b = bounds_type3(full);
  rec.r_min = b.first;
  rec.r_max = b.second;
  return {train_view, std::move(mags), rec};
}

SparseObservations load_input(const std::string& path, const TrainFlags& f) {
  return load_triplets(path, {f.delimiter, f.header});
}

// Historical data must share the id maps of the main input; rows/items that
// do not occur in the input are dropped.
SparseObservations align_history(const SparseObservations& input, const SparseObservations& hist) {
  std::unordered_map<std::string, Index> rows, cols;
  for (Index i = 0; i < input.n_rows(); ++i) rows.emplace(input.row_labels()[i], i);
  for (Index j = 0; j < input.n_cols(); ++j) cols.emplace(input.col_labels()[j], j);
  std::vector<Entry> kept;
  for (const auto& e : hist.entries()) {
    const auto r = rows.find(hist.row_labels()[e.row]);
    const auto c = cols.find(hist.col_labels()[e.col]);
    if (r != rows.end() && c != cols.end()) kept.push_back({r->second, c->second, e.value});
  }
  return SparseObservations(input.n_rows(), input.n_cols(), std::move(kept), input.row_labels(),
                            input.col_labels());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

// ---------------------------------------------------------------- train

struct TrainCmd {
  std::string input, out = "model.mbmf", trace;
  TrainFlags flags;
};

int do_train(const TrainCmd& c, std::ostream& out, spdlog::logger& log) {
  const auto data = load_input(c.input, c.flags);
  std::optional<SparseObservations> history;
  if (c.flags.magnitudes == "historical")
    history = c.flags.history.empty() ? data : align_history(data, load_input(c.flags.history, c.flags));
  auto prep = prepare(data, data, history ? &*history : nullptr, c.flags, log);
  const auto cfg = c.flags.config();
  log.info("training {}x{} with {} entries, K={}", data.n_rows(), data.n_cols(), prep.data.size(), cfg.k);
  auto result = train(prep.data, prep.magnitudes, cfg);
  result.model.preprocess = prep.record;

  save_model(c.out, {result.model, data.row_labels(), data.col_labels()});
  const std::string trace_path = c.trace.empty() ? c.out + ".trace.csv" : c.trace;
  auto tout = open_out(trace_path);
  result.trace.write_csv(tout);
  out.precision(17);
  out << "final objective " << result.trace.final_objective() << " after " << result.trace.iterations
      << " iterations (" << to_string(result.trace.reason) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvalCmd {
  std::string input, out = "evaluation.csv", manifest, sampling = "disjoint", f1 = "micro";
  std::string ks = "10,20,50";
  std::vector<std::string> algorithms{"mbmf"};
  Index folds = 5;
  double fraction = 0.1;
  TrainFlags flags;
};

std::vector<double> run_method(const std::string& alg, const SparseObservations& train_view,
                               const SparseObservations& full, const SparseObservations& historical, Index k,
                               const TrainFlags& flags, std::span<const std::pair<Index, Index>> cells,
                               spdlog::logger& log) {
  TrainConfig cfg = flags.config();
  cfg.k = k;
  if (alg == "mbmf") {
    auto prep = prepare(train_view, full, &historical, flags, log);
    auto res = train(prep.data, prep.magnitudes, cfg);
    res.model.preprocess = prep.record;
    return predict(res.model, cells);
  }
  if (alg == "mf") return predict(train_mf(train_view, k, cfg).model, cells);
  if (alg == "nmf") {
    const double lo = std::min(bounds_type3(full).first, 0.0);
    auto pre = shift_nonnegative(train_view, lo);
    auto p = predict(train_nmf(pre.data, k, cfg).model, cells);
    for (auto& v : p) v += pre.record.offset;
    return p;
  }
  throw UsageError("unknown algorithm '" + alg + "' (expected mbmf, mf or nmf)");
}

int do_evaluate(const EvalCmd& c, std::ostream& out, spdlog::logger& log) {
  const auto ks = parse_k_list(c.ks, "--ks");
  const auto data = load_input(c.input, c.flags);
  const auto split = split_historical_present(data, c.flags.seed);
  const auto sampling = c.sampling == "independent" ? FoldSampling::independent : FoldSampling::disjoint;
  const auto folds = make_validation_folds(split.present, c.folds, c.fraction, c.flags.seed, sampling);
  if (!c.manifest.empty()) {
    auto mout = open_out(c.manifest);
    write_fold_manifest(mout, folds);
  }
  const auto agg = c.f1 == "macro" ? F1Aggregation::macro : F1Aggregation::micro;
  log.info("split: {} historical, {} present ({} forced moves)", split.historical.size(), split.present.size(),
           split.forced_moves);

  auto csv = open_out(c.out);
  csv.precision(17);
  write_eval_csv_header(csv);
  for (const auto& alg : c.algorithms) {
    const std::string label =
        alg == "mbmf" ? (parse_variant(c.flags.variant) == Variant::centered ? "mbmf-c" : "mbmf-n") : alg;
    for (Index k : ks) {
      EvalReport sum;
      for (Index f = 0; f < folds.size(); ++f) {
        const auto train_view = split.present.without(folds[f]);
        std::vector<std::pair<Index, Index>> cells;
        for (Index i : folds[f]) cells.emplace_back(split.present[i].row, split.present[i].col);
        const auto preds = run_method(alg, train_view, data, split.historical, k, c.flags, cells, log);
        const auto r = evaluate(split.present, folds[f], preds, agg);
        csv << label << ',' << k << ',' << r.rmse << ',' << r.mae << ',' << r.f1 << ',' << f << '\n';
        sum.rmse += r.rmse;
        sum.mae += r.mae;
        sum.f1 += r.f1;
      }
      const auto nf = static_cast<double>(folds.size());
      csv << label << ',' << k << ',' << sum.rmse / nf << ',' << sum.mae / nf << ',' << sum.f1 / nf << ",avg\n";
      out << label << " K=" << k << " rmse=" << sum.rmse / nf << " mae=" << sum.mae / nf << " f1=" << sum.f1 / nf
          << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictCmd {
  std::string model, pairs, out;
  char delimiter = ',';
  bool header = false;
};

int do_predict(const PredictCmd& c, std::ostream& out) {
  const auto mf = load_model(c.model);
  std::unordered_map<std::string, Index> rows, cols;
  for (Index i = 0; i < mf.row_labels.size(); ++i) rows.emplace(mf.row_labels[i], i);
  for (Index j = 0; j < mf.col_labels.size(); ++j) cols.emplace(mf.col_labels[j], j);

  std::ifstream in(c.pairs);
  if (!in) throw DataError("cannot open " + c.pairs);
  std::ofstream file;
  if (!c.out.empty()) file = open_out(c.out);
  std::ostream& sink = c.out.empty() ? out : file;
  sink.precision(17);

  std::string line;
  bool header_pending = c.header;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      sink << line << c.delimiter << "prediction\n";
      continue;
    }
    std::istringstream ls(line);
    std::string user, item;
    std::getline(ls, user, c.delimiter);
    std::getline(ls, item, c.delimiter);
    const auto r = rows.find(user);
    const auto col = cols.find(item);
    sink << user << c.delimiter << item << c.delimiter;
    if (r == rows.end()) {
      sink << "ERROR:unknown-user\n";
    } else if (col == cols.end()) {
      sink << "ERROR:unknown-item\n";
    } else {
      const std::pair<Index, Index> cell{r->second, col->second};
      sink << predict(mf.model, std::span(&cell, 1)).front() << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- variance

struct VarianceCmd {
  Index n = 100, m = 100, reps = 10;
  double density = 0.2;
  double range_min = 0.0, range_max = 10.0;
  std::optional<std::string> ks;
  Index k_min = 5, k_max = 50, k_step = 5;
  std::vector<std::string> algorithms{"mf", "nmf", "mbmf-n"};
  std::uint64_t seed = 0;
  Index max_iters = 500;
  double tol = 1e-5;
  double lr = 0.1;
  std::string out = "variance.csv";
};

int do_variance(const VarianceCmd& c, std::ostream& out, spdlog::logger& log) {
  std::vector<Index> ks;
  if (c.ks)
    ks = parse_k_list(*c.ks, "--ks");
  else
    for (Index k = c.k_min; k <= c.k_max; k += c.k_step) ks.push_back(k);
  if (ks.empty()) throw UsageError("empty K sweep");
  TrainConfig base;
  base.max_iters = c.max_iters;
  base.tol = c.tol;
  base.lr_phi = base.lr_theta = c.lr;
  std::vector<Algorithm> algs;
  for (const auto& a : c.algorithms) algs.push_back(make_algorithm(a, base, {c.range_min, c.range_max}));

  auto csv = open_out(c.out);
  write_variance_csv_header(csv);
  for (Index k : ks) {
    // A fresh synthetic matrix per K.
    auto rng = substream(c.seed, "variance-k" + std::to_string(k));
    const auto synth = generate_synthetic(c.n, c.m, {c.range_min, c.range_max}, c.density, rng());
    log.info("K={}: {} observed, {} missing", k, synth.observed.size(), synth.missing.size());
    for (const auto& r : variance_experiment(algs, synth, c.reps, k, rng())) {
      write_variance_row(csv, r);
      out << r.algorithm << " K=" << k << " ave_sigma=" << r.ave_sigma << " max_sigma=" << r.max_sigma << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthCmd {
  Index n = 500, m = 500;
  double density = 0.2, range_min = 0.0, range_max = 10.0;
  std::uint64_t seed = 0;
  std::string out = "synthetic.csv", full;
};

int do_synth(const SynthCmd& c, std::ostream& out) {
  const auto s = generate_synthetic(c.n, c.m, {c.range_min, c.range_max}, c.density, c.seed);
  save_triplets(c.out, s.observed);
  if (!c.full.empty()) save_triplets(c.full, s.full);
  out << "wrote " << s.observed.size() << " observed entries (" << s.missing.size() << " missing) to " << c.out
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- magnitudes

struct MagnitudesCmd {
  std::string input, out_prefix = "magnitudes";
  std::string method = "historical";
  TrainFlags flags;
};

int do_magnitudes(const MagnitudesCmd& c, std::ostream& out) {
  const auto data = load_input(c.input, c.flags);
  MagnitudePair mags;
  if (c.method == "historical") {
    const auto hist = c.flags.history.empty() ? data : align_history(data, load_input(c.flags.history, c.flags));
    mags = historical_magnitude_pair(hist, c.flags.rho);
  } else {
    const auto observed = bounds_type3(data);
    const double lo = c.flags.range_min.value_or(observed.first);
    const double hi = c.flags.range_max.value_or(observed.second);
    mags = c.method == "type1-c" ? magnitudes_type1_centered(data.n_rows(), data.n_cols(), lo, hi)
                                 : magnitudes_type1_nonneg(data.n_rows(), data.n_cols(), hi - std::min(lo, 0.0));
  }
  save_magnitudes(c.out_prefix + ".users.csv", data.row_labels(), mags.r_w);
  save_magnitudes(c.out_prefix + ".items.csv", data.col_labels(), mags.r_h);
  out << "wrote " << c.out_prefix << ".users.csv and " << c.out_prefix << ".items.csv\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  CLI::App app{"Magnitude-bounded matrix factorisation toolkit", "mbmf"};
  app.require_subcommand(1);

  TrainCmd train_c;
  auto* train_cmd = app.add_subcommand("train", "Fit a bounded factorisation and save the model");
  train_cmd->add_option("--input", train_c.input, "Triplet file user,item,value")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_c.out, "Model output path");
  train_cmd->add_option("--trace", train_c.trace, "Trace CSV path (default <out>.trace.csv)");
  add_train_flags(train_cmd, train_c.flags, true);

  EvalCmd eval_c;
  auto* eval_cmd = app.add_subcommand("evaluate", "Historical/present split, validation folds and metrics");
  eval_cmd->add_option("--input", eval_c.input, "Triplet file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--ks", eval_c.ks, "Comma-separated K values")->expected(0, 1);
  eval_cmd->add_option("--folds", eval_c.folds, "Number of validation folds")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--fraction", eval_c.fraction, "Share of present entries per fold");
  eval_cmd->add_option("--fold-sampling", eval_c.sampling)->check(CLI::IsMember({"disjoint", "independent"}));
  eval_cmd->add_option("--f1", eval_c.f1, "F1 aggregation")->check(CLI::IsMember({"micro", "macro"}));
  eval_cmd->add_option("--algorithms", eval_c.algorithms, "mbmf, mf, nmf")->delimiter(',');
  eval_cmd->add_option("--manifest", eval_c.manifest, "Write the fold manifest here");
  eval_cmd->add_option("--out", eval_c.out, "Report CSV");
  add_train_flags(eval_cmd, eval_c.flags, false);

  PredictCmd pred_c;
  auto* pred_cmd = app.add_subcommand("predict", "Predict user,item pairs with a saved model");
  pred_cmd->add_option("--model", pred_c.model)->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--pairs", pred_c.pairs, "File of user,item lines")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--out", pred_c.out, "Output CSV (default stdout)");
  pred_cmd->add_option("--delimiter", pred_c.delimiter);
  pred_cmd->add_flag("--header", pred_c.header, "Pair file has a header line (copied to the output)");

  VarianceCmd var_c;
  auto* var_cmd = app.add_subcommand("variance", "Prediction variance on synthetic data");
  var_cmd->add_option("--n", var_c.n)->check(CLI::PositiveNumber);
  var_cmd->add_option("--m", var_c.m)->check(CLI::PositiveNumber);
  var_cmd->add_option("--density", var_c.density);
  var_cmd->add_option("--reps", var_c.reps)->check(CLI::PositiveNumber);
  var_cmd->add_option("--ks", var_c.ks, "Explicit comma-separated K list (overrides the sweep)")->expected(0, 1);
  var_cmd->add_option("--k-min", var_c.k_min)->check(CLI::Range(Index{2}, Index{1} << 20));
  var_cmd->add_option("--k-max", var_c.k_max);
  var_cmd->add_option("--k-step", var_c.k_step)->check(CLI::PositiveNumber);
  var_cmd->add_option("--algorithms", var_c.algorithms, "mf, nmf, mbmf-n, mbmf-c, constant")->delimiter(',');
  var_cmd->add_option("--range-min", var_c.range_min);
  var_cmd->add_option("--range-max", var_c.range_max);
  var_cmd->add_option("--seed", var_c.seed);
  var_cmd->add_option("--max-iters", var_c.max_iters)->check(CLI::PositiveNumber);
  var_cmd->add_option("--tol", var_c.tol)->check(CLI::PositiveNumber);
  var_cmd->add_option("--lr", var_c.lr)->check(CLI::PositiveNumber);
  var_cmd->add_option("--out", var_c.out);

  SynthCmd synth_c;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic observation file");
  synth_cmd->add_option("--n", synth_c.n)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--m", synth_c.m)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--density", synth_c.density);
  synth_cmd->add_option("--range-min", synth_c.range_min);
  synth_cmd->add_option("--range-max", synth_c.range_max);
  synth_cmd->add_option("--seed", synth_c.seed);
  synth_cmd->add_option("--out", synth_c.out, "Observed triplets");
  synth_cmd->add_option("--full", synth_c.full, "Also write the complete matrix");

  MagnitudesCmd mag_c;
  auto* mag_cmd = app.add_subcommand("magnitudes", "Compute and export magnitude vectors");
  mag_cmd->add_option("--input", mag_c.input)->required()->check(CLI::ExistingFile);
  mag_cmd->add_option("--method", mag_c.method)->check(CLI::IsMember({"historical", "type1-c", "type1-n"}));
  mag_cmd->add_option("--out-prefix", mag_c.out_prefix, "Writes <prefix>.users.csv and <prefix>.items.csv");
  add_train_flags(mag_cmd, mag_c.flags, false);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("mbmf");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "mbmf: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train_cmd) return do_train(train_c, out, *log);
    if (*eval_cmd) return do_evaluate(eval_c, out, *log);
    if (*pred_cmd) return do_predict(pred_c, out);
    if (*var_cmd) return do_variance(var_c, out, *log);
    if (*synth_cmd) return do_synth(synth_c, out);
    if (*mag_cmd) return do_magnitudes(mag_c, out);
  } catch (const UsageError& e) {
    err << "mbmf: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "mbmf: " << e.what() << '\n';
    std::ostringstream trace;
    e.trace().write_csv(trace);
    log->debug("trace:\n{}", trace.str());
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "mbmf: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace mbmf::cli
