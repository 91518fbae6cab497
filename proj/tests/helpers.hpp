#ifndef MBMF_TESTS_HELPERS_HPP
#define MBMF_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mbmf/data.hpp"
#include "mbmf/random.hpp"
#include "mbmf/spherical.hpp"

namespace testing {

using mbmf::Entry;
using mbmf::Index;
using mbmf::SparseObservations;

// Each cell observed independently with probability `density`.
inline SparseObservations random_sparse(Index n, Index m, double density, std::uint64_t seed, double lo = -1.0,
                                        double hi = 1.0) {
  auto rng = mbmf::substream(seed, "test-sparse");
  std::vector<Entry> es;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      if (mbmf::uniform(rng, 0.0, 1.0) < density) es.push_back({i, j, mbmf::uniform(rng, lo, hi)});
  if (es.empty()) es.push_back({0, 0, 0.5});
  return SparseObservations(n, m, std::move(es));
}

inline mbmf::MagnitudePair random_magnitudes(Index n, Index m, std::uint64_t seed, double lo = 0.5,
                                             double hi = 1.5) {
  auto rng = mbmf::substream(seed, "test-mags");
  mbmf::MagnitudePair p;
  p.r_w.resize(static_cast<Eigen::Index>(n));
  p.r_h.resize(static_cast<Eigen::Index>(m));
  for (auto& v : p.r_w) v = mbmf::uniform(rng, lo, hi);
  for (auto& v : p.r_h) v = mbmf::uniform(rng, lo, hi);
  return p;
}

// Fully observed n x m matrix with entries (WH)_ij of the given model.
inline SparseObservations dense_from(const mbmf::RowMatrix& w, const mbmf::ColMatrix& h) {
  std::vector<Entry> es;
  for (Index i = 0; i < static_cast<Index>(w.rows()); ++i)
    for (Index j = 0; j < static_cast<Index>(h.cols()); ++j)
      es.push_back({i, j, w.row(static_cast<Eigen::Index>(i)).dot(h.col(static_cast<Eigen::Index>(j)))});
  return SparseObservations(static_cast<Index>(w.rows()), static_cast<Index>(h.cols()), std::move(es));
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing

#endif  // MBMF_TESTS_HELPERS_HPP
