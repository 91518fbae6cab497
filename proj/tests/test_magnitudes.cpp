#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "mbmf/magnitudes.hpp"

using namespace mbmf;

namespace {

SparseObservations row_of(std::vector<double> values) {
  std::vector<Entry> es;
  for (Index j = 0; j < values.size(); ++j) es.push_back({0, j, values[j]});
  return SparseObservations(1, values.size(), es);
}

std::vector<double> values_of(const SparseObservations& d) {
  std::vector<double> v;
  for (const auto& e : d.entries()) v.push_back(e.value);
  return v;
}

}  // namespace

TEST_CASE("type 1 centring") {
  auto c = center_type1(row_of({1, 2, 3, 4, 5}), 1, 5);
  CHECK(values_of(c.data) == std::vector<double>{-2, -1, 0, 1, 2});
  CHECK(c.record.offset == 3.0);
  CHECK(c.record.variant == Variant::centered);

  auto j = center_type1(row_of({-10, 3.5, 10}), -10, 10);
  CHECK(values_of(j.data) == std::vector<double>{-10, 3.5, 10});
  CHECK(j.record.offset == 0.0);

  CHECK_THROWS_AS(center_type1(row_of({6}), 1, 5), DataError);
}

TEST_CASE("type 1 centred magnitudes") {
  auto m = magnitudes_type1_centered(3, 4, 1, 5);
  for (double r : m.r_w) CHECK(r == doctest::Approx(std::sqrt(2.0)));
  CHECK(m.r_w[0] * m.r_h[0] == doctest::Approx(2.0));
  auto j = magnitudes_type1_centered(2, 2, -10, 10);
  CHECK(j.r_h[1] == doctest::Approx(std::sqrt(10.0)));
}

TEST_CASE("shift to nonnegative") {
  auto s = shift_nonnegative(row_of({-10, 0, 10}), -10);
  CHECK(values_of(s.data) == std::vector<double>{0, 10, 20});
  CHECK(s.record.offset == -10.0);
  auto u = shift_nonnegative(row_of({1, 4}), 1);
  CHECK(values_of(u.data) == std::vector<double>{1, 4});
  CHECK(u.record.offset == 0.0);
}

TEST_CASE("type 1 nonnegative magnitudes") {
  auto m = magnitudes_type1_nonneg(2, 3, 5);
  CHECK(m.r_w[0] == doctest::Approx(std::sqrt(5.0)));
  CHECK(m.r_w[0] * m.r_h[2] == doctest::Approx(5.0));
  auto one = magnitudes_type1_nonneg(1, 1, 1);
  CHECK(one.r_w[0] == 1.0);
}

TEST_CASE("historical magnitudes blend individual and global terms") {
  // user 0: one rating of 1; user 1: many ratings; user 2: no history
  const Index m = 1000;
  std::vector<Entry> es{{0, 0, 1.0}};
  for (Index j = 0; j < 100; ++j) es.push_back({1, j, j % 2 ? 5.0 : 3.0});
  SparseObservations hist(3, m, es);
  auto st = historical_stats(hist, Axis::rows);
  CHECK(*st.mean[0] == 1.0);
  CHECK(*st.sd[0] == 0.0);
  CHECK(!st.mean[2].has_value());

  double gmean = 0.0;
  for (const auto& e : es) gmean += e.value;
  gmean /= static_cast<double>(es.size());
  double gss = 0.0;
  for (const auto& e : es) gss += (e.value - gmean) * (e.value - gmean);
  const double global = std::sqrt(gmean + std::sqrt(gss / static_cast<double>(es.size())));

  auto r = historical_magnitudes(st, m);
  const double w0 = 1.0 / (0.05 * m);
  CHECK(r[0] == doctest::Approx(w0 * 1.0 + (1 - w0) * global).epsilon(1e-14));
  // 100 ratings >= 0.05 * 1000: weight clamps to one
  CHECK(r[1] == doctest::Approx(std::sqrt(4.0 + 1.0)).epsilon(1e-14));
  CHECK(r[2] == doctest::Approx(global).epsilon(1e-14));

  CHECK_THROWS_AS(historical_stats(SparseObservations(2, 2, {}), Axis::rows), DataError);
  CHECK_THROWS_AS(historical_stats(hist, Axis::rows, 0.0), DataError);
}

TEST_CASE("type 2 centring and contradictions") {
  MagnitudePair p{Vector::Ones(1), Vector::Constant(1, 2.0)};
  auto flagged = center_type2(row_of({5}), p, ContradictionPolicy::reject_outlier);
  REQUIRE(flagged.contradictions.size() == 1);
  CHECK(flagged.contradictions[0].bound == 2.0);
  CHECK(flagged.data.empty());

  CHECK_THROWS_AS(center_type2(row_of({5}), p, ContradictionPolicy::error), DataError);

  auto raised = center_type2(row_of({5}), p, ContradictionPolicy::raise_magnitude);
  // smallest r_w with 5 <= 2 * r_w * 2
  CHECK(raised.magnitudes.r_w[0] == doctest::Approx(1.25));
  CHECK(raised.data[0].value == doctest::Approx(2.5));
  CHECK(raised.data[0].value <= raised.magnitudes.r_w[0] * raised.magnitudes.r_h[0] + 1e-12);
  CHECK(raised.record.offset_kind == OffsetKind::per_entry_rank1);

  auto mid = center_type2(row_of({2}), p);
  CHECK(mid.contradictions.empty());
  CHECK(mid.data[0].value == 0.0);
}

TEST_CASE("type 3 bounds") {
  CHECK(bounds_type3(row_of({2, 7, 4})) == std::pair<double, double>{2, 7});
  CHECK(bounds_type3(row_of({3})) == std::pair<double, double>{3, 3});
}

TEST_CASE("magnitude files") {
  std::vector<std::string> labels{"a", "b,c", "d"};
  Vector v(3);
  v << 1.5, 0.1, 3.0;
  std::stringstream ss;
  write_magnitudes(ss, labels, v);
  CHECK(read_magnitudes(ss, labels) == v);

  std::istringstream missing("a,1\n");
  CHECK_THROWS_AS(read_magnitudes(missing, labels), DataError);
  std::istringstream extra("a,1\nb,c,2\nd,3\nzz,4\n");
  CHECK(read_magnitudes(extra, labels)[1] == 2.0);
}
