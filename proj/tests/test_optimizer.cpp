#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mbmf/optimizer.hpp"
#include "mbmf/spherical.hpp"
#include "oracles.hpp"

using namespace mbmf;

namespace {

double brute_objective(const SparseObservations& d, const FactorModel& m) {
  // Dense product, then sum over observed cells only.
  Eigen::MatrixXd wh = m.w * m.h;
  double s = 0.0;
  for (Index i = 0; i < d.n_rows(); ++i)
    for (Index j = 0; j < d.n_cols(); ++j)
      for (const auto& e : d.entries())
        if (e.row == i && e.col == j) s += std::pow(e.value - wh(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 2);
  return s;
}

// rank-1 data r_w r_h^T cos(c), reachable by a K=2 model.
SparseObservations rank_one(Index n, const MagnitudePair& mags) {
  std::vector<Entry> es;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      es.push_back({i, j, std::cos(0.7) * mags.r_w[static_cast<Eigen::Index>(i)] * mags.r_h[static_cast<Eigen::Index>(j)]});
  return SparseObservations(n, n, es);
}

FactorModel model_of(RowMatrix w, ColMatrix h) {
  FactorModel m;
  m.w = std::move(w);
  m.h = std::move(h);
  m.magnitudes.r_w = Vector::Ones(m.w.rows());
  m.magnitudes.r_h = Vector::Ones(m.h.cols());
  return m;
}

}  // namespace

TEST_CASE("objective examples") {
  SparseObservations one(1, 1, {{0, 0, 2.0}});
  RowMatrix w(1, 2);
  w << 0.5, 0.0;
  ColMatrix h(2, 1);
  h << 1.0, 0.0;
  CHECK(objective(one, model_of(w, h)) == doctest::Approx(2.25));

  SparseObservations fit(1, 1, {{0, 0, 0.5}});
  CHECK(objective(fit, model_of(w, h)) == 0.0);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto d = testing::random_sparse(5, 6, 0.5, seed);
    auto m = build_factors(random_angles(5, 6, 3, seed), testing::random_magnitudes(5, 6, seed));
    CHECK(objective(d, m) == doctest::Approx(brute_objective(d, m)).epsilon(1e-12));
  }
}

TEST_CASE("factor gradients match finite differences") {
  auto d = testing::random_sparse(5, 6, 0.6, 4);
  auto m = build_factors(random_angles(5, 6, 3, 4), testing::random_magnitudes(5, 6, 4));
  auto g = grad_f_wrt_factors(d, m);
  const double step = 1e-6;
  for (Eigen::Index i = 0; i < m.w.rows(); ++i)
    for (Eigen::Index j = 0; j < m.w.cols(); ++j) {
      auto p = m, q = m;
      p.w(i, j) += step;
      q.w(i, j) -= step;
      CHECK(testing::rel_err(g.grad_w(i, j), (objective(d, p) - objective(d, q)) / (2 * step), 1e-6) < 1e-5);
    }
  for (Eigen::Index j = 0; j < m.h.rows(); ++j)
    for (Eigen::Index c = 0; c < m.h.cols(); ++c) {
      auto p = m, q = m;
      p.h(j, c) += step;
      q.h(j, c) -= step;
      CHECK(testing::rel_err(g.grad_h(j, c), (objective(d, p) - objective(d, q)) / (2 * step), 1e-6) < 1e-5);
    }
}

TEST_CASE("perfect fit and empty data give zero gradients") {
  auto m = build_factors(random_angles(4, 5, 3, 1), testing::random_magnitudes(4, 5, 1));
  auto d = testing::dense_from(m.w, m.h);
  auto g = grad_f_wrt_factors(d, m);
  CHECK(g.grad_w.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(g.grad_h.cwiseAbs().maxCoeff() < 1e-14);

  SparseObservations none(4, 5, {});
  auto z = grad_f_wrt_factors(none, m);
  CHECK(z.grad_w.isZero(0.0));
  CHECK(z.grad_h.isZero(0.0));
}

TEST_CASE("angle gradients match finite differences and both paths agree") {
  const double step = 1e-6;
  for (Index k : {2, 3, 5}) {
    auto d = testing::random_sparse(4, 5, 0.6, 30 + k);
    auto angles = random_angles(4, 5, k, k);
    auto mags = testing::random_magnitudes(4, 5, k);
    auto g = grad_f_wrt_angles(d, angles, mags);
    auto f = [&](const AngleState& s) { return oracle::objective_from_angles(d, s, mags); };
    for (Eigen::Index a = 0; a < angles.phi.rows(); ++a)
      for (Eigen::Index b = 0; b < angles.phi.cols(); ++b) {
        auto p = angles, q = angles;
        p.phi(a, b) += step;
        q.phi(a, b) -= step;
        CHECK(testing::rel_err(g.d_phi(a, b), static_cast<double>((f(p) - f(q)) / (2 * step)), 1e-6) < 1e-5);
      }
    for (Eigen::Index b = 0; b < angles.theta.rows(); ++b)
      for (Eigen::Index c = 0; c < angles.theta.cols(); ++c) {
        auto p = angles, q = angles;
        p.theta(b, c) += step;
        q.theta(b, c) -= step;
        CHECK(testing::rel_err(g.d_theta(b, c), static_cast<double>((f(p) - f(q)) / (2 * step)), 1e-6) < 1e-5);
      }
    auto e = grad_f_wrt_angles(d, angles, mags, GradientPath::elementwise);
    CHECK((e.d_phi - g.d_phi).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((e.d_theta - g.d_theta).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("zero residual gives zero angle gradients and stops at once") {
  auto angles = random_angles(4, 5, 3, 2);
  auto mags = testing::random_magnitudes(4, 5, 2);
  auto m = build_factors(angles, mags);
  auto d = testing::dense_from(m.w, m.h);
  auto g = grad_f_wrt_angles(d, angles, mags);
  CHECK(g.d_phi.cwiseAbs().maxCoeff() < 1e-14);

  // Exactly representable fit: W=(1,0), H=(1,0)^T, V=1.
  AngleState s;
  s.phi = RowMatrix::Zero(1, 1);
  s.theta = ColMatrix::Zero(1, 1);
  MagnitudePair p{Vector::Ones(1), Vector::Ones(1)};
  TrainConfig cfg;
  cfg.k = 2;
  auto res = train(SparseObservations(1, 1, {{0, 0, 1.0}}), p, cfg, s);
  CHECK(res.trace.reason == Termination::stationary);
  CHECK(res.trace.iterations == 0);
}

TEST_CASE("rank-1 recovery from known magnitudes") {
  auto mags = testing::random_magnitudes(10, 10, 5);
  auto d = rank_one(10, mags);
  TrainConfig cfg;
  cfg.k = 2;
  cfg.seed = 1;
  auto res = train(d, mags, cfg);
  CHECK(res.trace.final_objective() < 1e-4);
  CHECK(res.trace.iterations <= 500);
}

TEST_CASE("training is deterministic, monotone and keeps magnitudes") {
  auto d = testing::random_sparse(20, 15, 0.4, 9, 0.0, 1.0);
  auto mags = testing::random_magnitudes(20, 15, 9);
  TrainConfig cfg;
  cfg.k = 4;
  cfg.seed = 11;
  cfg.max_iters = 120;
  auto a = train(d, mags, cfg), b = train(d, mags, cfg);
  CHECK(a.trace.objective == b.trace.objective);
  CHECK(a.trace.accepted == b.trace.accepted);
  CHECK(a.model.w == b.model.w);

  auto acc = a.trace.accepted_objectives();
  double prev = a.trace.initial_objective;
  for (double v : acc) {
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(a.trace.final_objective() == doctest::Approx(objective(d, a.model)).epsilon(1e-12));
  for (Eigen::Index i = 0; i < a.model.w.rows(); ++i) CHECK(std::abs(a.model.w.row(i).norm() - mags.r_w[i]) < 1e-10);
  for (Eigen::Index j = 0; j < a.model.h.cols(); ++j) CHECK(std::abs(a.model.h.col(j).norm() - mags.r_h[j]) < 1e-10);

  cfg.elementwise_updates = true;
  auto e = train(d, mags, cfg);
  CHECK(e.trace.final_objective() == doctest::Approx(a.trace.final_objective()).epsilon(1e-8));
}

TEST_CASE("step size grows on acceptance and halves on rejection") {
  auto d = testing::random_sparse(15, 15, 0.5, 12);
  auto mags = testing::random_magnitudes(15, 15, 12);
  TrainConfig cfg;
  cfg.k = 3;
  cfg.max_iters = 80;
  cfg.lr_phi = cfg.lr_theta = 5.0;
  auto res = train(d, mags, cfg);
  const auto& t = res.trace;
  bool saw_reject = false;
  for (Index i = 1; i < t.objective.size(); ++i) {
    const double ratio = t.lr_phi[i] / t.lr_phi[i - 1];
    CHECK(ratio == doctest::Approx(t.accepted[i - 1] ? 1.1 : 0.5));
    saw_reject |= !t.accepted[i - 1];
  }
  CHECK(saw_reject);
}

TEST_CASE("early stop after a run of small decreases") {
  auto mags = testing::random_magnitudes(10, 10, 5);
  auto d = rank_one(10, mags);
  TrainConfig cfg;
  cfg.k = 2;
  cfg.seed = 1;
  auto res = train(d, mags, cfg);
  REQUIRE(res.trace.reason == Termination::converged);
  // the last `patience` accepted steps each decreased by less than tol
  auto acc = res.trace.accepted_objectives();
  REQUIRE(acc.size() >= cfg.patience + 1);
  for (Index i = acc.size() - cfg.patience; i < acc.size(); ++i) CHECK(acc[i - 1] - acc[i] < cfg.tol);
}

TEST_CASE("divergence guard aborts with the trace") {
  auto d = testing::random_sparse(8, 8, 0.5, 3);
  auto mags = testing::random_magnitudes(8, 8, 3);
  TrainConfig cfg;
  cfg.k = 3;
  cfg.divergence_factor = 1e-6;
  try {
    train(d, mags, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.trace().reason == Termination::diverged);
    CHECK(e.trace().iterations == 1);
  }
}

TEST_CASE("configuration and input validation") {
  auto d = testing::random_sparse(4, 4, 0.5, 1);
  auto mags = testing::random_magnitudes(4, 4, 1);
  TrainConfig cfg;
  cfg.k = 1;
  CHECK_THROWS_AS(train(d, mags, cfg), DataError);
  cfg.k = 2;
  auto bad = mags;
  bad.r_w[0] = 0.0;
  CHECK_THROWS_AS(train(d, bad, cfg), DataError);
  auto small = testing::random_magnitudes(3, 4, 1);
  CHECK_THROWS_AS(train(d, small, cfg), DimensionError);
  CHECK_THROWS_AS(train(SparseObservations(4, 4, {}), mags, cfg), DataError);
}

TEST_CASE("predictions undo the recorded offset") {
  RowMatrix w(1, 2);
  w << 1.0, 0.0;
  ColMatrix h(2, 1);
  h << 1.0, 0.0;
  auto m = model_of(w, h);
  std::vector<std::pair<Index, Index>> cell{{0, 0}};
  CHECK(predict(m, cell).front() == 1.0);

  m.w(0, 0) = 2.0;
  m.preprocess.variant = Variant::centered;
  m.preprocess.offset = 3.0;
  CHECK(predict_raw(m, cell).front() == 2.0);
  CHECK(predict(m, cell).front() == 5.0);

  m.preprocess.offset_kind = OffsetKind::per_entry_rank1;
  m.magnitudes.r_w[0] = 1.5;
  m.magnitudes.r_h[0] = 2.0;
  CHECK(predict(m, cell).front() == 5.0);

  std::vector<std::pair<Index, Index>> outside{{1, 0}};
  CHECK_THROWS_AS(predict(m, outside), DimensionError);
}
