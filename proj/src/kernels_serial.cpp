#include "kernel_detail.hpp"

namespace mbmf::kernels::serial {

namespace {

void to_cartesian(std::span<const double> angles, std::span<const double> radii, Index k, std::span<double> out) {
  for (Index v = 0; v < radii.size(); ++v)
    detail::vector_to_cartesian(angles.data() + v * (k - 1), radii[v], k, out.data() + v * k);
}

void derivative_tensor(std::span<const double> angles, std::span<const double> radii, Index k,
                       std::span<double> tensor) {
  const Index n = radii.size();
  for (Index v = 0; v < n; ++v)
    detail::vector_derivative(angles.data() + v * (k - 1), radii[v], k, tensor.data() + v * k, n * k);
}

void contract(std::span<const double> tensor, std::span<const double> grad, Index n_vec, Index k,
              std::span<double> out) {
  for (Index v = 0; v < n_vec; ++v)
    detail::contract_vector(tensor.data(), grad.data() + v * k, v, n_vec, k, out.data() + v * (k - 1));
}

void residuals(std::span<const Entry> entries, const RowMatrix& w, const ColMatrix& h, std::span<double> res) {
  for (Index e = 0; e < entries.size(); ++e) res[e] = detail::entry_residual(entries[e], w, h);
}

double sum_squares(const ObservationIndex& index, std::span<const double> res) {
  double total = 0.0;
  const Index n = index.row_ptr.size() - 1;
  for (Index r = 0; r < n; ++r) total += detail::row_sum_squares(index, res, r);
  return total;
}

void factor_gradients(std::span<const Entry>, const ObservationIndex& index, std::span<const double> res,
                      const RowMatrix& w, const ColMatrix& h, RowMatrix& grad_w, ColMatrix& grad_h) {
  const Index k = static_cast<Index>(w.cols());
  const Index n = static_cast<Index>(w.rows());
  const Index m = static_cast<Index>(h.cols());
  grad_w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  grad_h.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
  for (Index r = 0; r < n; ++r)
    detail::accumulate_gradient(index.row_entries, index.row_minor, index.row_ptr[r], index.row_ptr[r + 1], res, k, h.data(),
                                grad_w.data() + r * k);
  for (Index c = 0; c < m; ++c)
    detail::accumulate_gradient(index.col_entries, index.col_minor, index.col_ptr[c], index.col_ptr[c + 1], res, k, w.data(),
                                grad_h.data() + c * k);
}

}  // namespace

const KernelSet& kernels() {
  static const KernelSet set{to_cartesian, derivative_tensor, contract, residuals, sum_squares, factor_gradients};
  return set;
}

}  // namespace mbmf::kernels::serial

namespace mbmf::kernels {

const KernelSet& kernel_set(Backend backend) {
  return backend == Backend::serial ? serial::kernels() : omp::kernels();
}

}  // namespace mbmf::kernels
