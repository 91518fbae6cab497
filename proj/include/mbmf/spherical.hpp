#ifndef MBMF_SPHERICAL_HPP
#define MBMF_SPHERICAL_HPP

#include <span>
#include <vector>

#include "mbmf/kernels.hpp"
#include "mbmf/types.hpp"

namespace mbmf {

/// Hyperspherical coordinates of a K-vector: K-1 angles and a radius.
struct SphericalCoords {
  Vector angles;
  double radius = 0.0;
};

/// x_1 = r cos a_1, x_k = r (prod_{p<k} sin a_p) cos a_k, x_K = r prod_{p<K} sin a_p.
/// Throws DimensionError when fewer than one angle is given (K < 2).
Vector spherical_to_cartesian(std::span<const double> angles, double radius);

/// Inverse conversion. The first K-2 angles land in [0, pi], the last in
/// [0, 2 pi). Throws DataError for the zero vector.
SphericalCoords cartesian_to_spherical(std::span<const double> x);

/// Spherical2Cartesian for both factors: row i of W from phi row i scaled by
/// r_w[i]; column j of H from theta column j scaled by r_h[j].
FactorModel build_factors(const AngleState& angles, const MagnitudePair& mags,
                          kernels::Backend backend = kernels::Backend::omp);

/// Partial derivatives of N latent vectors with respect to their K-1 angles.
/// Storage is one slab per angle index (angle varies slowest); within a slab,
/// vector v occupies K contiguous values.
class DerivativeTensor {
 public:
  DerivativeTensor() = default;
  DerivativeTensor(Index n_vectors, Index k) : n_(n_vectors), k_(k), data_((k - 1) * n_vectors * k, 0.0) {}

  Index n_vectors() const { return n_; }
  Index rank() const { return k_; }

  /// d x_{vector, component} / d angle_{vector, angle}
  double operator()(Index vector, Index component, Index angle) const {
    return data_[(angle * n_ + vector) * k_ + component];
  }

  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

 private:
  Index n_ = 0;
  Index k_ = 0;
  std::vector<double> data_;
};

/// GradWwrtPhi: the N x K x (K-1) tensor dW_aj / dPhi_ab.
DerivativeTensor grad_w_wrt_phi(const RowMatrix& phi, const Vector& r_w,
                                kernels::Backend backend = kernels::Backend::omp);

/// GradHwrtTheta: the (K-1) x K x M tensor dH_jb / dTheta_ab, indexed as
/// (column b, component j, angle a).
DerivativeTensor grad_h_wrt_theta(const ColMatrix& theta, const Vector& r_h,
                                  kernels::Backend backend = kernels::Backend::omp);

/// dx/d angle_b of a single vector, assembled from the auxiliary sine and
/// cosine vectors s(., b) and c(., b) by direct products. Quadratic per entry;
/// used as the per-element reference path.
Vector angle_partial_elementwise(std::span<const double> angles, double radius, Index b);

}  // namespace mbmf

#endif  // MBMF_SPHERICAL_HPP
