#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mbmf/eval.hpp"
#include "oracles.hpp"

using namespace mbmf;

namespace {

SparseObservations pairs(std::vector<double> truths, Index user = 0) {
  std::vector<Entry> es;
  for (Index j = 0; j < truths.size(); ++j) es.push_back({user, j, truths[j]});
  return SparseObservations(user + 1, truths.size(), es);
}

std::vector<Index> all(Index n) {
  std::vector<Index> v(n);
  for (Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("rmse and mae examples") {
  auto d = pairs({1, 3});
  auto m = all(2);
  CHECK(rmse(d, m, std::vector<double>{1, 3}) == 0.0);
  CHECK(rmse(d, m, std::vector<double>{2, 4}) == doctest::Approx(1.0));
  CHECK(mae(d, m, std::vector<double>{1, 3}) == 0.0);
  CHECK(mae(d, m, std::vector<double>{2, 5}) == doctest::Approx(1.5));
  CHECK_THROWS_AS(rmse(d, m, std::vector<double>{1}), DimensionError);
  CHECK_THROWS_AS(rmse(d, {}, std::vector<double>{}), DataError);
}

TEST_CASE("f1 examples") {
  auto d = pairs({1, 5});
  auto m = all(2);
  CHECK(f1_score(d, m, std::vector<double>{1, 5}) == 100.0);
  CHECK(f1_score(d, m, std::vector<double>{5, 1}) == 0.0);
  // constant rows: both sets empty, identical
  auto flat = pairs({3, 3});
  CHECK(f1_score(flat, m, std::vector<double>{2, 2}) == 100.0);
}

TEST_CASE("metrics match brute-force oracles") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto d = testing::random_sparse(20, 12, 0.5, seed, 1.0, 5.0);
    auto rng = substream(seed, "pred");
    std::vector<Index> mask;
    for (Index i = 0; i < d.size(); ++i)
      if (uniform(rng, 0, 1) < 0.4) mask.push_back(i);
    if (mask.empty()) mask.push_back(0);
    std::vector<double> pred(mask.size());
    for (auto& p : pred) p = uniform(rng, 1.0, 5.0);
    auto cs = oracle::cells_of(d, mask, pred);
    CHECK(std::abs(rmse(d, mask, pred) - oracle::rmse(cs)) < 1e-12);
    CHECK(std::abs(mae(d, mask, pred) - oracle::mae(cs)) < 1e-12);
    CHECK(std::abs(f1_score(d, mask, pred) - oracle::f1(cs, false)) < 1e-12);
    CHECK(std::abs(f1_score(d, mask, pred, F1Aggregation::macro) - oracle::f1(cs, true)) < 1e-12);
    auto rep = evaluate(d, mask, pred);
    CHECK(rep.n_eval_entries == mask.size());
  }
}

TEST_CASE("synthetic generator") {
  auto s = generate_synthetic(500, 500, {0, 10}, 0.2, 1);
  CHECK(s.observed.size() == 50000);
  CHECK(s.full.size() == 250000);
  CHECK(s.missing.size() == 200000);
  for (Index c : s.observed.row_counts()) CHECK(c > 0);
  for (Index c : s.observed.col_counts()) CHECK(c > 0);
  double lo = 1e9, hi = -1e9;
  for (const auto& e : s.full.entries()) lo = std::min(lo, e.value), hi = std::max(hi, e.value);
  CHECK(lo == 0.0);
  CHECK(hi == 10.0);

  auto dense = generate_synthetic(20, 30, {0, 10}, 1.0, 1);
  CHECK(dense.observed.size() == 600);
  CHECK(dense.missing.empty());

  auto again = generate_synthetic(50, 40, {0, 10}, 0.1, 9);
  auto again2 = generate_synthetic(50, 40, {0, 10}, 0.1, 9);
  CHECK(std::equal(again.observed.entries().begin(), again.observed.entries().end(),
                   again2.observed.entries().begin()));
  for (Index c : again.observed.row_counts()) CHECK(c > 0);
  for (Index c : again.observed.col_counts()) CHECK(c > 0);

  CHECK_THROWS_AS(generate_synthetic(100, 100, {0, 10}, 0.001, 1), DataError);
  CHECK_THROWS_AS(generate_synthetic(10, 10, {0, 10}, 0.0, 1), DataError);
}

TEST_CASE("variance of a constant predictor is zero") {
  auto s = generate_synthetic(30, 30, {0, 10}, 0.2, 4);
  auto reps = variance_experiment({make_algorithm("constant", TrainConfig{}, {0, 10})}, s, 5, 5, 1);
  REQUIRE(reps.size() == 1);
  CHECK(reps[0].ave_sigma == 0.0);
  CHECK(reps[0].max_sigma == 0.0);
  CHECK(reps[0].sigma.size() == s.missing.size());
}

TEST_CASE("variance experiment is seed-deterministic") {
  TrainConfig cfg;
  cfg.max_iters = 20;
  std::vector<Algorithm> algs{make_algorithm("mbmf-n", cfg, {0, 10}), make_algorithm("nmf", cfg, {0, 10})};
  auto a = variance_experiment(algs, 30, 30, 0.3, 3, 4, 2);
  auto b = variance_experiment(algs, 30, 30, 0.3, 3, 4, 2);
  for (Index i = 0; i < a.size(); ++i) {
    CHECK(a[i].sigma == b[i].sigma);
    CHECK(a[i].traces.size() == 3);
  }
  // bounded predictions of MBMF-n cannot spread past the range
  CHECK(a[0].max_sigma <= 10.0);
  CHECK_THROWS_AS(make_algorithm("svd", cfg, {0, 10}), DataError);
}
