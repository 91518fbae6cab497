// Serial reference kernels vs the OpenMP kernels, on sparse N x N instances
// at density 0.01 and K = 10. Run with OMP_NUM_THREADS set to compare.

#include <benchmark/benchmark.h>

#include <vector>

#include "mbmf/kernels.hpp"
#include "mbmf/optimizer.hpp"
#include "mbmf/random.hpp"
#include "mbmf/spherical.hpp"

namespace {

using namespace mbmf;
using kernels::Backend;

constexpr Index kRank = 10;

struct Instance {
  SparseObservations data;
  ObservationIndex index;
  AngleState angles;
  MagnitudePair mags;
  FactorModel model;
  std::vector<double> res;
};

const Instance& instance(Index n) {
  static std::vector<std::pair<Index, Instance>> cache;
  for (const auto& [size, inst] : cache)
    if (size == n) return inst;
  auto rng = substream(n, "bench");
  std::vector<Entry> es;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (uniform(rng, 0.0, 1.0) < 0.01) es.push_back({i, j, uniform(rng, 0.0, 5.0)});
  Instance inst;
  inst.data = SparseObservations(n, n, std::move(es));
  inst.index = build_index(inst.data);
  inst.angles = random_angles(n, n, kRank, 1);
  inst.mags.r_w = Vector::Constant(static_cast<Eigen::Index>(n), 1.0);
  inst.mags.r_h = Vector::Constant(static_cast<Eigen::Index>(n), 1.0);
  inst.model = build_factors(inst.angles, inst.mags);
  inst.res.resize(inst.data.size());
  kernels::kernel_set(Backend::serial).residuals(inst.data.entries(), inst.model.w, inst.model.h, inst.res);
  cache.emplace_back(n, std::move(inst));
  return cache.back().second;
}

Backend backend_of(const benchmark::State& s) { return s.range(1) ? Backend::omp : Backend::serial; }

void BM_BuildFactors(benchmark::State& s) {
  const auto& in = instance(static_cast<Index>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(build_factors(in.angles, in.mags, backend_of(s)));
}

void BM_DerivativeTensor(benchmark::State& s) {
  const auto& in = instance(static_cast<Index>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(grad_w_wrt_phi(in.angles.phi, in.mags.r_w, backend_of(s)));
}

void BM_Residuals(benchmark::State& s) {
  const auto& in = instance(static_cast<Index>(s.range(0)));
  const auto& ks = kernels::kernel_set(backend_of(s));
  std::vector<double> res(in.data.size());
  for (auto _ : s) {
    ks.residuals(in.data.entries(), in.model.w, in.model.h, res);
    benchmark::DoNotOptimize(ks.sum_squares(in.index, res));
  }
  s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * in.data.size()));
}

void BM_FactorGradients(benchmark::State& s) {
  const auto& in = instance(static_cast<Index>(s.range(0)));
  const auto& ks = kernels::kernel_set(backend_of(s));
  RowMatrix gw;
  ColMatrix gh;
  for (auto _ : s) {
    ks.factor_gradients(in.data.entries(), in.index, in.res, in.model.w, in.model.h, gw, gh);
    benchmark::DoNotOptimize(gw.data());
  }
  s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * in.data.size()));
}

void BM_AngleGradients(benchmark::State& s) {
  const auto& in = instance(static_cast<Index>(s.range(0)));
  for (auto _ : s)
    benchmark::DoNotOptimize(
        grad_f_wrt_angles(in.data, in.angles, in.mags, GradientPath::accelerated, backend_of(s)));
}

void sizes(benchmark::internal::Benchmark* b) {
  for (std::int64_t n : {1000, 2000, 4000})
    for (std::int64_t omp : {0, 1}) b->Args({n, omp});
  b->ArgNames({"n", "omp"})->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_BuildFactors)->Apply(sizes);
BENCHMARK(BM_DerivativeTensor)->Apply(sizes);
BENCHMARK(BM_Residuals)->Apply(sizes);
BENCHMARK(BM_FactorGradients)->Apply(sizes);
BENCHMARK(BM_AngleGradients)->Apply(sizes);

}  // namespace

BENCHMARK_MAIN();
