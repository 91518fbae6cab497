#include "mbmf/optimizer.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "descent.hpp"
#include "mbmf/random.hpp"
#include "mbmf/spherical.hpp"

namespace mbmf {

void TrainConfig::validate() const {
  if (k < 2) throw DataError("k must be at least 2 (each latent vector needs one angle)");
  validate_steps();
}

void TrainConfig::validate_steps() const {
  if (max_iters < 1) throw DataError("max_iters must be at least 1");
  if (!(tol > 0.0)) throw DataError("tol must be positive");
  if (patience < 1) throw DataError("patience must be at least 1");
  if (!(lr_phi > 0.0) || !(lr_theta > 0.0)) throw DataError("learning rates must be positive");
  if (!(lr_grow > 1.0)) throw DataError("lr_grow must exceed 1");
  if (!(lr_shrink > 1.0)) throw DataError("lr_shrink must exceed 1");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::max_iters: return "max_iters";
    case Termination::converged: return "converged";
    case Termination::stationary: return "stationary";
    case Termination::diverged: return "diverged";
  }
  return "unknown";
}

double TrainTrace::final_objective() const {
  double f = initial_objective;
  for (Index i = 0; i < objective.size(); ++i)
    if (accepted[i]) f = objective[i];
  return f;
}

std::vector<double> TrainTrace::accepted_objectives() const {
  std::vector<double> out;
  for (Index i = 0; i < objective.size(); ++i)
    if (accepted[i]) out.push_back(objective[i]);
  return out;
}

void TrainTrace::write_csv(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "iter,objective,lr_phi,lr_theta,accepted\n";
  for (Index i = 0; i < objective.size(); ++i)
    out << i + 1 << ',' << objective[i] << ',' << lr_phi[i] << ',' << lr_theta[i] << ',' << (accepted[i] ? 1 : 0)
        << '\n';
  out.precision(old);
}

namespace {

void check_dims(const SparseObservations& data, Index n, Index m) {
  if (data.n_rows() != n || data.n_cols() != m)
    throw DimensionError("model is " + std::to_string(n) + "x" + std::to_string(m) + " but data is " +
                         std::to_string(data.n_rows()) + "x" + std::to_string(data.n_cols()));
}

AngleGradients contract_gradients(const AngleState& angles, const MagnitudePair& mags, const FactorGradients& g,
                                  GradientPath path, const kernels::KernelSet& ks, kernels::Backend backend) {
  const Index n = static_cast<Index>(angles.phi.rows());
  const Index m = static_cast<Index>(angles.theta.cols());
  const Index k = angles.rank();
  AngleGradients out;
  out.d_phi.resize(angles.phi.rows(), angles.phi.cols());
  out.d_theta.resize(angles.theta.rows(), angles.theta.cols());

  if (path == GradientPath::accelerated) {
    const auto tw = grad_w_wrt_phi(angles.phi, mags.r_w, backend);
    ks.contract(tw.raw(), {g.grad_w.data(), n * k}, n, k, {out.d_phi.data(), n * (k - 1)});
    const auto th = grad_h_wrt_theta(angles.theta, mags.r_h, backend);
    ks.contract(th.raw(), {g.grad_h.data(), m * k}, m, k, {out.d_theta.data(), m * (k - 1)});
    return out;
  }

  // Per-element form: dF/dPhi_ab = dF/dW_a: . dW_a:/dPhi_ab
  for (Index a = 0; a < n; ++a) {
    const std::span<const double> row(angles.phi.data() + a * (k - 1), k - 1);
    for (Index b = 0; b + 1 < k; ++b) {
      const Vector d = angle_partial_elementwise(row, mags.r_w[static_cast<Eigen::Index>(a)], b);
      out.d_phi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          g.grad_w.row(static_cast<Eigen::Index>(a)).transpose().dot(d);
    }
  }
  for (Index j = 0; j < m; ++j) {
    const std::span<const double> col(angles.theta.data() + j * (k - 1), k - 1);
    for (Index a = 0; a + 1 < k; ++a) {
      const Vector d = angle_partial_elementwise(col, mags.r_h[static_cast<Eigen::Index>(j)], a);
      out.d_theta(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) =
          g.grad_h.col(static_cast<Eigen::Index>(j)).dot(d);
    }
  }
  return out;
}

class AngleProblem {
 public:
  AngleProblem(const SparseObservations& data, const MagnitudePair& mags, const TrainConfig& cfg, AngleState init)
      : data_(data),
        index_(build_index(data)),
        mags_(mags),
        cfg_(cfg),
        ks_(kernels::kernel_set(cfg.backend)),
        cur_(std::move(init)),
        cur_res_(data.size()),
        cand_res_(data.size()) {
    cur_model_ = build_factors(cur_, mags_, cfg_.backend);
    cur_obj_ = evaluate(cur_model_, cur_res_);
  }

  double objective() const { return cur_obj_; }

  bool compute_direction() {
    ks_.factor_gradients(data_.entries(), index_, cur_res_, cur_model_.w, cur_model_.h, grads_.grad_w, grads_.grad_h);
    const auto path = cfg_.elementwise_updates ? GradientPath::elementwise : GradientPath::accelerated;
    dir_ = contract_gradients(cur_, mags_, grads_, path, ks_, cfg_.backend);
    return dir_.d_phi.cwiseAbs().maxCoeff() > 0.0 || dir_.d_theta.cwiseAbs().maxCoeff() > 0.0;
  }

  double propose(double lr_phi, double lr_theta) {
    cand_.phi = cur_.phi - lr_phi * dir_.d_phi;
    cand_.theta = cur_.theta - lr_theta * dir_.d_theta;
    cand_model_ = build_factors(cand_, mags_, cfg_.backend);
    cand_obj_ = evaluate(cand_model_, cand_res_);
    return cand_obj_;
  }

  void accept() {
    std::swap(cur_, cand_);
    std::swap(cur_model_, cand_model_);
    std::swap(cur_res_, cand_res_);
    cur_obj_ = cand_obj_;
  }

  TrainResult finish(TrainTrace trace) && {
    cur_model_.preprocess.variant = cfg_.variant;
    return {std::move(cur_model_), std::move(cur_), std::move(trace)};
  }

 private:
  double evaluate(const FactorModel& model, std::vector<double>& res) const {
    ks_.residuals(data_.entries(), model.w, model.h, res);
    return ks_.sum_squares(index_, res);
  }

  const SparseObservations& data_;
  ObservationIndex index_;
  const MagnitudePair& mags_;
  const TrainConfig& cfg_;
  const kernels::KernelSet& ks_;

  AngleState cur_, cand_;
  FactorModel cur_model_, cand_model_;
  std::vector<double> cur_res_, cand_res_;
  double cur_obj_ = 0.0, cand_obj_ = 0.0;
  FactorGradients grads_;
  AngleGradients dir_;
};

}  // namespace

double objective(const SparseObservations& data, const FactorModel& model, kernels::Backend backend) {
  check_dims(data, model.n_rows(), model.n_cols());
  if (model.h.rows() != model.w.cols()) throw DimensionError("W and H disagree on K");
  const auto& ks = kernels::kernel_set(backend);
  std::vector<double> res(data.size());
  ks.residuals(data.entries(), model.w, model.h, res);
  return ks.sum_squares(build_index(data), res);
}

FactorGradients grad_f_wrt_factors(const SparseObservations& data, const FactorModel& model,
                                   kernels::Backend backend) {
  check_dims(data, model.n_rows(), model.n_cols());
  if (model.h.rows() != model.w.cols()) throw DimensionError("W and H disagree on K");
  const auto& ks = kernels::kernel_set(backend);
  std::vector<double> res(data.size());
  ks.residuals(data.entries(), model.w, model.h, res);
  FactorGradients g;
  ks.factor_gradients(data.entries(), build_index(data), res, model.w, model.h, g.grad_w, g.grad_h);
  return g;
}

AngleGradients grad_f_wrt_angles(const SparseObservations& data, const AngleState& angles, const MagnitudePair& mags,
                                 GradientPath path, kernels::Backend backend) {
  const FactorModel model = build_factors(angles, mags, backend);
  const FactorGradients g = grad_f_wrt_factors(data, model, backend);
  return contract_gradients(angles, mags, g, path, kernels::kernel_set(backend), backend);
}

AngleState random_angles(Index n_rows, Index n_cols, Index k, std::uint64_t seed) {
  if (k < 2) throw DimensionError("latent dimension K must be at least 2");
  auto rng = substream(seed, "init");
  auto draw = [&](Index pos) {
    return pos + 2 < k ? uniform(rng, 0.0, std::numbers::pi) : uniform(rng, 0.0, 2.0 * std::numbers::pi);
  };
  AngleState s;
  s.phi.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(k - 1));
  s.theta.resize(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(n_cols));
  for (Index i = 0; i < n_rows; ++i)
    for (Index b = 0; b + 1 < k; ++b) s.phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = draw(b);
  for (Index j = 0; j < n_cols; ++j)
    for (Index b = 0; b + 1 < k; ++b) s.theta(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = draw(b);
  return s;
}

TrainResult train(const SparseObservations& data, const MagnitudePair& mags, const TrainConfig& cfg) {
  cfg.validate();
  return train(data, mags, cfg, random_angles(data.n_rows(), data.n_cols(), cfg.k, cfg.seed));
}

TrainResult train(const SparseObservations& data, const MagnitudePair& mags, const TrainConfig& cfg,
                  AngleState initial) {
  cfg.validate();
  if (data.empty()) throw DataError("cannot train on an empty observation set");
  mags.validate();
  check_dims(data, static_cast<Index>(mags.r_w.size()), static_cast<Index>(mags.r_h.size()));
  if (initial.rank() != cfg.k || static_cast<Index>(initial.theta.rows()) + 1 != cfg.k)
    throw DimensionError("initial angles do not match k");
  AngleProblem problem(data, mags, cfg, std::move(initial));
  TrainTrace trace = detail::run_descent(problem, cfg);
  return std::move(problem).finish(std::move(trace));
}

std::vector<double> predict_raw(const FactorModel& model, std::span<const std::pair<Index, Index>> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (i >= model.n_rows() || j >= model.n_cols())
      throw DimensionError("prediction index (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    out.push_back(model.w.row(static_cast<Eigen::Index>(i)).dot(model.h.col(static_cast<Eigen::Index>(j))));
  }
  return out;
}

std::vector<double> predict(const FactorModel& model, std::span<const std::pair<Index, Index>> pairs) {
  auto out = predict_raw(model, pairs);
  const auto& rec = model.preprocess;
  for (Index p = 0; p < out.size(); ++p) {
    if (rec.offset_kind == OffsetKind::scalar) {
      out[p] += rec.offset;
    } else {
      const auto [i, j] = pairs[p];
      out[p] += model.magnitudes.r_w[static_cast<Eigen::Index>(i)] * model.magnitudes.r_h[static_cast<Eigen::Index>(j)];
    }
  }
  return out;
}

}  // namespace mbmf
