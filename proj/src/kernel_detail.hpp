#ifndef MBMF_KERNEL_DETAIL_HPP
#define MBMF_KERNEL_DETAIL_HPP

// Per-item bodies shared by the serial and OpenMP kernel loops.

#include <cmath>
#include <vector>

#include "mbmf/kernels.hpp"

namespace mbmf::kernels::detail {

inline void vector_to_cartesian(const double* angles, double radius, Index k, double* x) {
  double s = radius;
  for (Index j = 0; j + 1 < k; ++j) {
    x[j] = s * std::cos(angles[j]);
    s *= std::sin(angles[j]);
  }
  x[k - 1] = s;
}

// slab_stride = distance between [b][v][.] and [b+1][v][.]
inline void vector_derivative(const double* angles, double radius, Index k, double* out, Index slab_stride) {
  const Index na = k - 1;
  thread_local std::vector<double> trig;
  trig.resize(2 * na);
  double* sn = trig.data();
  double* cs = sn + na;
  for (Index j = 0; j < na; ++j) {
    sn[j] = std::sin(angles[j]);
    cs[j] = std::cos(angles[j]);
  }
  double prefix = radius;  // radius * prod_{p<b} sin(angle_p)
  for (Index b = 0; b < na; ++b) {
    double* d = out + b * slab_stride;
    for (Index j = 0; j < b; ++j) d[j] = 0.0;
    d[b] = -prefix * sn[b];
    double q = prefix * cs[b];
    for (Index j = b + 1; j < na; ++j) {
      d[j] = q * cs[j];
      q *= sn[j];
    }
    d[na] = q;
    prefix *= sn[b];
  }
}

inline void contract_vector(const double* tensor, const double* grad, Index v, Index n_vec, Index k, double* out) {
  const Index slab = n_vec * k;
  for (Index b = 0; b + 1 < k; ++b) {
    const double* t = tensor + b * slab + v * k;
    double acc = 0.0;
    for (Index j = 0; j < k; ++j) acc += grad[j] * t[j];
    out[b] = acc;
  }
}

inline double entry_residual(const Entry& e, const RowMatrix& w, const ColMatrix& h) {
  const Index k = static_cast<Index>(w.cols());
  const double* wr = w.data() + e.row * k;
  const double* hc = h.data() + e.col * k;
  double acc = 0.0;
  for (Index j = 0; j < k; ++j) acc += wr[j] * hc[j];
  return acc - e.value;
}

inline double row_sum_squares(const ObservationIndex& index, std::span<const double> res, Index r) {
  double acc = 0.0;
  for (Index p = index.row_ptr[r]; p < index.row_ptr[r + 1]; ++p) {
    const double x = res[index.row_entries[p]];
    acc += x * x;
  }
  return acc;
}

// out = 2 * sum over list positions [begin, end) of res_e * other_vector(minor)
inline void accumulate_gradient(const std::vector<Index>& entries, const std::vector<Index>& minors,
                                Index begin, Index end, std::span<const double> res, Index k,
                                const double* other_base, double* __restrict out) {
  for (Index j = 0; j < k; ++j) out[j] = 0.0;
  for (Index p = begin; p < end; ++p) {
    const double r = res[entries[p]];
    const double* __restrict o = other_base + minors[p] * k;
    for (Index j = 0; j < k; ++j) out[j] += r * o[j];
  }
  for (Index j = 0; j < k; ++j) out[j] *= 2.0;
}

}  // namespace mbmf::kernels::detail

#endif  // MBMF_KERNEL_DETAIL_HPP
