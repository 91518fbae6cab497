#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "mbmf/data.hpp"

using namespace mbmf;

namespace {

SparseObservations parse(const std::string& text, TripletOptions opts = {}) {
  std::istringstream in(text);
  return parse_triplets(in, opts);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

SparseObservations dense(Index n, Index m) {
  std::vector<Entry> es;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) es.push_back({i, j, static_cast<double>(i * m + j)});
  return SparseObservations(n, m, es);
}

std::set<std::pair<Index, Index>> cells(const SparseObservations& d) {
  std::set<std::pair<Index, Index>> s;
  for (const auto& e : d.entries()) s.emplace(e.row, e.col);
  return s;
}

void check_partition(const SparseObservations& data, const SplitPlan& plan) {
  auto h = cells(plan.historical), p = cells(plan.present);
  CHECK(h.size() + p.size() == data.size());
  for (const auto& c : p) CHECK(h.count(c) == 0);
  auto rows = plan.present.row_counts(), cols = plan.present.col_counts();
  auto all_rows = data.row_counts(), all_cols = data.col_counts();
  for (Index i = 0; i < rows.size(); ++i)
    if (all_rows[i]) CHECK(rows[i] > 0);
  for (Index j = 0; j < cols.size(); ++j)
    if (all_cols[j]) CHECK(cols[j] > 0);
}

}  // namespace

TEST_CASE("triplets parse into labelled sparse matrix") {
  auto d = parse("u1,i1,5\nu1,i2,3\nu2,i1,4");
  CHECK(d.n_rows() == 2);
  CHECK(d.n_cols() == 2);
  CHECK(d.size() == 3);
  CHECK(d.row_labels() == std::vector<std::string>{"u1", "u2"});
  CHECK(d.col_labels() == std::vector<std::string>{"i1", "i2"});
  CHECK(d[1] == Entry{0, 1, 3.0});
  CHECK(d[2] == Entry{1, 0, 4.0});
}

TEST_CASE("comments, blank lines, header and delimiter") {
  TripletOptions opts;
  opts.delimiter = '\t';
  opts.has_header = true;
  auto d = parse("# note\nuser\titem\tvalue\n\nb\tx\t1.5\na\tx\t-2\n", opts);
  CHECK(d.size() == 2);
  CHECK(d.row_labels() == std::vector<std::string>{"b", "a"});
  CHECK(d[1].value == -2.0);
}

TEST_CASE("empty input is rejected") {
  CHECK(error_of("") == "no entries");
  CHECK(error_of("# only a comment\n\n") == "no entries");
}

TEST_CASE("duplicate pair names the offending line") {
  auto msg = error_of("u1,i1,5\nu2,i1,1\nu1,i1,3\n");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("duplicate") != std::string::npos);
}

TEST_CASE("malformed rows are rejected") {
  CHECK(error_of("u1,i1\n").find("line 1") != std::string::npos);
  CHECK(error_of("u1,i1,5\nu1,i2,abc\n").find("line 2") != std::string::npos);
}

TEST_CASE("constructor validates bounds and duplicates") {
  CHECK_THROWS_AS(SparseObservations(2, 2, {{2, 0, 1.0}}), DataError);
  CHECK_THROWS_AS(SparseObservations(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), DataError);
}

TEST_CASE("triplet round trip") {
  auto d = testing::random_sparse(7, 9, 0.5, 3);
  std::stringstream ss;
  write_triplets(ss, d);
  auto back = parse_triplets(ss);
  REQUIRE(back.size() == d.size());
  for (Index i = 0; i < d.size(); ++i) CHECK(back[i].value == d[i].value);
}

TEST_CASE("index lists every entry once per axis") {
  auto d = testing::random_sparse(6, 8, 0.4, 11);
  auto idx = build_index(d);
  CHECK(idx.row_ptr.size() == d.n_rows() + 1);
  CHECK(idx.col_ptr.size() == d.n_cols() + 1);
  for (Index i = 0; i < d.n_rows(); ++i)
    for (Index p = idx.row_ptr[i]; p < idx.row_ptr[i + 1]; ++p) CHECK(d[idx.row_entries[p]].row == i);
  for (Index j = 0; j < d.n_cols(); ++j)
    for (Index p = idx.col_ptr[j]; p < idx.col_ptr[j + 1]; ++p) CHECK(d[idx.col_entries[p]].col == j);
}

TEST_CASE("split of a full 4x4 matrix with seed 7") {
  auto d = dense(4, 4);
  auto plan = split_historical_present(d, 7);
  CHECK(plan.historical.size() == 8);
  CHECK(plan.present.size() == 8);
  check_partition(d, plan);
}

TEST_CASE("split forces a single-entry row into present") {
  std::vector<Entry> es;
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 6; ++j) es.push_back({i, j, 1.0});
  es.push_back({5, 2, 9.0});
  SparseObservations d(6, 6, es);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto plan = split_historical_present(d, seed);
    check_partition(d, plan);
    bool found = false;
    for (const auto& e : plan.present.entries()) found |= e.row == 5 && e.col == 2;
    CHECK(found);
  }
}

TEST_CASE("split is deterministic for a seed") {
  auto d = testing::random_sparse(20, 15, 0.3, 5);
  auto a = split_historical_present(d, 42), b = split_historical_present(d, 42);
  CHECK(cells(a.present) == cells(b.present));
  CHECK(cells(a.historical) == cells(b.historical));
}

TEST_CASE("folds: sizes, disjointness, determinism") {
  auto d = testing::random_sparse(10, 10, 1.0, 1);
  REQUIRE(d.size() == 100);
  auto folds = make_validation_folds(d, 5, 0.1, 3);
  REQUIRE(folds.size() == 5);
  std::set<Index> seen;
  for (const auto& f : folds) {
    CHECK(f.size() == 10);
    for (Index i : f) CHECK(seen.insert(i).second);
  }
  CHECK(make_validation_folds(d, 5, 0.1, 3) == folds);

  auto big = make_validation_folds(d, 1, 0.999, 3);
  CHECK(big.front().size() == 99);

  auto indep = make_validation_folds(d, 5, 0.3, 3, FoldSampling::independent);
  for (const auto& f : indep) CHECK(std::set<Index>(f.begin(), f.end()).size() == 30);

  CHECK_THROWS_AS(make_validation_folds(d, 5, 0.3, 3), DataError);
  CHECK_THROWS_AS(make_validation_folds(d, 1, 0.001, 3), DataError);
}

TEST_CASE("fold manifest round trip") {
  std::vector<std::vector<Index>> folds{{3, 1, 4}, {1, 5}, {9}};
  std::stringstream ss;
  write_fold_manifest(ss, folds);
  CHECK(read_fold_manifest(ss) == folds);
}

TEST_CASE("behaviour counts become weighted interest") {
  std::istringstream in("u,c,click\nu,c,click\nu,c,pay\nv,d,collect\n");
  auto log = parse_behavior_log(in);
  auto d = behaviors_to_interest(log);
  REQUIRE(d.size() == 2);
  CHECK(d[0].value == 7.0);
  CHECK(d[1].value == 2.0);
  // v never touched c: no entry rather than a zero
  CHECK(d.n_rows() == 2);
  CHECK(d.n_cols() == 2);

  auto zero = behaviors_to_interest(log, {0, 0, 0, 0});
  REQUIRE(zero.size() == 2);
  for (const auto& e : zero.entries()) CHECK(e.value == 0.0);

  CHECK(parse_behavior("cart") == Behavior::add_to_cart);
  CHECK_THROWS_AS(parse_behavior("browse"), DataError);
}
