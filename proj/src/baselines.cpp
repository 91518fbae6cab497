#include "mbmf/baselines.hpp"

#include <cmath>

#include "descent.hpp"
#include "mbmf/random.hpp"

namespace mbmf {

namespace {

constexpr double kNmfEpsilon = 1e-12;

void check_baseline_input(const SparseObservations& data, Index k, const TrainConfig& cfg) {
  cfg.validate_steps();
  if (k < 1) throw DataError("k must be at least 1");
  if (data.empty()) throw DataError("cannot train on an empty observation set");
}

class FactorProblem {
 public:
  FactorProblem(const SparseObservations& data, const TrainConfig& cfg, BaselineModel init)
      : data_(data),
        index_(build_index(data)),
        ks_(kernels::kernel_set(cfg.backend)),
        cur_(std::move(init)),
        cur_res_(data.size()),
        cand_res_(data.size()) {
    cur_obj_ = evaluate(cur_, cur_res_);
  }

  double objective() const { return cur_obj_; }

  bool compute_direction() {
    ks_.factor_gradients(data_.entries(), index_, cur_res_, cur_.w, cur_.h, grad_w_, grad_h_);
    return grad_w_.cwiseAbs().maxCoeff() > 0.0 || grad_h_.cwiseAbs().maxCoeff() > 0.0;
  }

  double propose(double lr_w, double lr_h) {
    cand_.w = cur_.w - lr_w * grad_w_;
    cand_.h = cur_.h - lr_h * grad_h_;
    cand_obj_ = evaluate(cand_, cand_res_);
    return cand_obj_;
  }

  void accept() {
    std::swap(cur_, cand_);
    std::swap(cur_res_, cand_res_);
    cur_obj_ = cand_obj_;
  }

  BaselineModel take() && { return std::move(cur_); }

 private:
  double evaluate(const BaselineModel& m, std::vector<double>& res) const {
    ks_.residuals(data_.entries(), m.w, m.h, res);
    return ks_.sum_squares(index_, res);
  }

  const SparseObservations& data_;
  ObservationIndex index_;
  const kernels::KernelSet& ks_;
  BaselineModel cur_, cand_;
  std::vector<double> cur_res_, cand_res_;
  double cur_obj_ = 0.0, cand_obj_ = 0.0;
  RowMatrix grad_w_;
  ColMatrix grad_h_;
};

// factor <- factor * numer / (denom + eps), one latent vector per list.
// numer = sum V_e * other_e, denom = sum pred_e * other_e over the vector's entries.
template <typename OtherOf>
void multiplicative_sweep(const std::vector<Index>& ptr, const std::vector<Index>& list,
                          std::span<const Entry> entries, std::span<const double> pred, Index k, OtherOf other,
                          double* factor) {
  const auto n = static_cast<std::ptrdiff_t>(ptr.size() - 1);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t v = 0; v < n; ++v) {
    const auto u = static_cast<Index>(v);
    std::vector<double> numer(k, 0.0), denom(k, 0.0);
    for (Index p = ptr[u]; p < ptr[u + 1]; ++p) {
      const Index e = list[p];
      const double* o = other(e);
      for (Index j = 0; j < k; ++j) {
        numer[j] += entries[e].value * o[j];
        denom[j] += pred[e] * o[j];
      }
    }
    double* f = factor + u * k;
    for (Index j = 0; j < k; ++j) f[j] *= numer[j] / (denom[j] + kNmfEpsilon);
  }
}

}  // namespace

BaselineModel random_baseline_factors(const SparseObservations& data, Index k, std::uint64_t seed) {
  double mean_abs = 0.0;
  for (const auto& e : data.entries()) mean_abs += std::abs(e.value);
  mean_abs = data.empty() ? 1.0 : mean_abs / static_cast<double>(data.size());
  if (!(mean_abs > 0.0)) mean_abs = 1.0;
  const double scale = std::sqrt(mean_abs / static_cast<double>(k));
  auto rng = substream(seed, "init");
  BaselineModel m;
  m.w.resize(static_cast<Eigen::Index>(data.n_rows()), static_cast<Eigen::Index>(k));
  m.h.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(data.n_cols()));
  // Open interval (0, 1): redraw exact zeros.
  auto draw = [&] {
    double u = 0.0;
    while (u == 0.0) u = uniform(rng, 0.0, 1.0);
    return u * scale;
  };
  for (Eigen::Index i = 0; i < m.w.size(); ++i) m.w.data()[i] = draw();
  for (Eigen::Index i = 0; i < m.h.size(); ++i) m.h.data()[i] = draw();
  return m;
}

BaselineResult train_mf(const SparseObservations& data, Index k, const TrainConfig& cfg) {
  check_baseline_input(data, k, cfg);
  FactorProblem problem(data, cfg, random_baseline_factors(data, k, cfg.seed));
  TrainTrace trace = detail::run_descent(problem, cfg);
  return {std::move(problem).take(), std::move(trace)};
}

BaselineResult train_mf(const SparseObservations& data, const TrainConfig& cfg, BaselineModel initial) {
  check_baseline_input(data, static_cast<Index>(initial.w.cols()), cfg);
  if (initial.w.rows() != static_cast<Eigen::Index>(data.n_rows()) ||
      initial.h.cols() != static_cast<Eigen::Index>(data.n_cols()) || initial.h.rows() != initial.w.cols())
    throw DimensionError("initial factors do not match the data");
  FactorProblem problem(data, cfg, std::move(initial));
  TrainTrace trace = detail::run_descent(problem, cfg);
  return {std::move(problem).take(), std::move(trace)};
}

BaselineResult train_nmf(const SparseObservations& data, Index k, const TrainConfig& cfg) {
  check_baseline_input(data, k, cfg);
  for (const auto& e : data.entries())
    if (e.value < 0.0) throw DataError("NMF requires nonnegative observations");

  BaselineResult out;
  out.model = random_baseline_factors(data, k, cfg.seed);
  auto& w = out.model.w;
  auto& h = out.model.h;
  const auto index = build_index(data);
  const auto& ks = kernels::kernel_set(cfg.backend);
  const auto entries = data.entries();
  std::vector<double> res(data.size()), pred(data.size());

  auto refresh = [&] {
    ks.residuals(entries, w, h, res);
    for (Index e = 0; e < entries.size(); ++e) pred[e] = res[e] + entries[e].value;
    return ks.sum_squares(index, res);
  };

  auto& trace = out.trace;
  double current = refresh();
  trace.initial_objective = current;
  Index small_steps = 0;
  trace.reason = Termination::max_iters;
  for (Index it = 0; it < cfg.max_iters; ++it) {
    multiplicative_sweep(index.row_ptr, index.row_entries, entries, pred, k,
                         [&](Index e) { return h.data() + entries[e].col * k; }, w.data());
    ks.residuals(entries, w, h, res);
    for (Index e = 0; e < entries.size(); ++e) pred[e] = res[e] + entries[e].value;
    multiplicative_sweep(index.col_ptr, index.col_entries, entries, pred, k,
                         [&](Index e) { return w.data() + entries[e].row * k; }, h.data());
    const double next = refresh();
    trace.objective.push_back(next);
    trace.lr_phi.push_back(0.0);
    trace.lr_theta.push_back(0.0);
    trace.accepted.push_back(true);
    trace.iterations = it + 1;
    if (!std::isfinite(next)) {
      trace.reason = Termination::diverged;
      throw DivergenceError("NMF objective became non-finite", trace);
    }
    small_steps = current - next < cfg.tol ? small_steps + 1 : 0;
    current = next;
    if (small_steps >= cfg.patience) {
      trace.reason = Termination::converged;
      break;
    }
  }
  return out;
}

std::vector<double> predict(const BaselineModel& model, std::span<const std::pair<Index, Index>> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i >= static_cast<Index>(model.w.rows()) || j >= static_cast<Index>(model.h.cols()))
      throw DimensionError("prediction index out of range");
    out.push_back(model.w.row(static_cast<Eigen::Index>(i)).dot(model.h.col(static_cast<Eigen::Index>(j))));
  }
  return out;
}

double objective(const SparseObservations& data, const BaselineModel& model, kernels::Backend backend) {
  FactorModel fm;
  fm.w = model.w;
  fm.h = model.h;
  return objective(data, fm, backend);
}

}  // namespace mbmf
