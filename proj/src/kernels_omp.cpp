#include <vector>

#include "kernel_detail.hpp"

namespace mbmf::kernels::omp {

namespace {

using SIndex = std::ptrdiff_t;

void to_cartesian(std::span<const double> angles, std::span<const double> radii, Index k, std::span<double> out) {
  const auto n = static_cast<SIndex>(radii.size());
#pragma omp parallel for schedule(static)
  for (SIndex v = 0; v < n; ++v) {
    const auto u = static_cast<Index>(v);
    detail::vector_to_cartesian(angles.data() + u * (k - 1), radii[u], k, out.data() + u * k);
  }
}

void derivative_tensor(std::span<const double> angles, std::span<const double> radii, Index k,
                       std::span<double> tensor) {
  const Index n = radii.size();
#pragma omp parallel for schedule(static)
  for (SIndex v = 0; v < static_cast<SIndex>(n); ++v) {
    const auto u = static_cast<Index>(v);
    detail::vector_derivative(angles.data() + u * (k - 1), radii[u], k, tensor.data() + u * k, n * k);
  }
}

void contract(std::span<const double> tensor, std::span<const double> grad, Index n_vec, Index k,
              std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (SIndex v = 0; v < static_cast<SIndex>(n_vec); ++v) {
    const auto u = static_cast<Index>(v);
    detail::contract_vector(tensor.data(), grad.data() + u * k, u, n_vec, k, out.data() + u * (k - 1));
  }
}

void residuals(std::span<const Entry> entries, const RowMatrix& w, const ColMatrix& h, std::span<double> res) {
  const auto n = static_cast<SIndex>(entries.size());
#pragma omp parallel for schedule(static)
  for (SIndex e = 0; e < n; ++e)
    res[static_cast<Index>(e)] = detail::entry_residual(entries[static_cast<Index>(e)], w, h);
}

double sum_squares(const ObservationIndex& index, std::span<const double> res) {
  const Index n = index.row_ptr.size() - 1;
  std::vector<double> partial(n);
#pragma omp parallel for schedule(dynamic, 256)
  for (SIndex r = 0; r < static_cast<SIndex>(n); ++r)
    partial[static_cast<Index>(r)] = detail::row_sum_squares(index, res, static_cast<Index>(r));
  // Fixed-order merge keeps the result identical to the serial kernel.
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void factor_gradients(std::span<const Entry>, const ObservationIndex& index, std::span<const double> res,
                      const RowMatrix& w, const ColMatrix& h, RowMatrix& grad_w, ColMatrix& grad_h) {
  const Index k = static_cast<Index>(w.cols());
  const Index n = static_cast<Index>(w.rows());
  const Index m = static_cast<Index>(h.cols());
  grad_w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  grad_h.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
#pragma omp parallel
  {
#pragma omp for schedule(dynamic, 64) nowait
    for (SIndex r = 0; r < static_cast<SIndex>(n); ++r) {
      const auto u = static_cast<Index>(r);
      detail::accumulate_gradient(index.row_entries, index.row_minor, index.row_ptr[u], index.row_ptr[u + 1], res, k, h.data(),
                                  grad_w.data() + u * k);
    }
#pragma omp for schedule(dynamic, 64)
    for (SIndex c = 0; c < static_cast<SIndex>(m); ++c) {
      const auto u = static_cast<Index>(c);
      detail::accumulate_gradient(index.col_entries, index.col_minor, index.col_ptr[u], index.col_ptr[u + 1], res, k, w.data(),
                                  grad_h.data() + u * k);
    }
  }
}

}  // namespace

const KernelSet& kernels() {
  static const KernelSet set{to_cartesian, derivative_tensor, contract, residuals, sum_squares, factor_gradients};
  return set;
}

}  // namespace mbmf::kernels::omp
