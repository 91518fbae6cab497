#ifndef MBMF_KERNELS_HPP
#define MBMF_KERNELS_HPP

#include <span>

#include "mbmf/data.hpp"
#include "mbmf/types.hpp"

// Data-parallel inner loops of the training iteration. Two implementations
// share one interface: `serial` is the reference used by the tests, `omp`
// parallelises over rows/columns/entries with OpenMP. Every reduction is done
// in a fixed order, so both produce bit-identical results.
//
// Layout conventions:
//   angle vectors: n_vec blocks of (k-1) contiguous angles
//   latent vectors: n_vec blocks of k contiguous components
//   derivative tensor: (k-1) slabs, slab b holds n_vec blocks of k values,
//                      value [b][v][j] = d x_vj / d angle_vb
namespace mbmf::kernels {

enum class Backend { serial, omp };

struct KernelSet {
  /// x_v = radius_v * s(angles_v) * c(angles_v) for every vector.
  void (*spherical_to_cartesian)(std::span<const double> angles, std::span<const double> radii, Index k,
                                 std::span<double> out);
  /// Derivative tensor of every latent vector with respect to its angles.
  void (*derivative_tensor)(std::span<const double> angles, std::span<const double> radii, Index k,
                            std::span<double> tensor);
  /// out[v][b] = sum_j grad[v][j] * tensor[b][v][j]; the gradient block is
  /// shared by all k-1 slabs (the "duplicate" step).
  void (*contract)(std::span<const double> tensor, std::span<const double> grad, Index n_vec, Index k,
                   std::span<double> out);
  /// res_e = W_row . H_col - V_e for every observed entry.
  void (*residuals)(std::span<const Entry> entries, const RowMatrix& w, const ColMatrix& h, std::span<double> res);
  /// Sum of squared residuals, accumulated row by row in index order.
  double (*sum_squares)(const ObservationIndex& index, std::span<const double> res);
  /// grad_w = 2 R H^T and grad_h = 2 W^T R for the sparse residual R.
  void (*factor_gradients)(std::span<const Entry> entries, const ObservationIndex& index, std::span<const double> res,
                           const RowMatrix& w, const ColMatrix& h, RowMatrix& grad_w, ColMatrix& grad_h);
};

const KernelSet& kernel_set(Backend backend);

namespace serial {
const KernelSet& kernels();
}
namespace omp {
const KernelSet& kernels();
}

}  // namespace mbmf::kernels

#endif  // MBMF_KERNELS_HPP
