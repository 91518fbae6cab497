#include "mbmf/spherical.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mbmf {

namespace {

void require_rank(Index k) {
  if (k < 2) throw DimensionError("latent dimension K must be at least 2 (got " + std::to_string(k) + ")");
}

}  // namespace

void MagnitudePair::validate() const {
  auto check = [](const Vector& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!(v[i] > 0.0) || !std::isfinite(v[i]))
        throw DataError(std::string(name) + "[" + std::to_string(i) + "] must be a positive finite magnitude");
  };
  check(r_w, "r_w");
  check(r_h, "r_h");
}

Vector spherical_to_cartesian(std::span<const double> angles, double radius) {
  const Index k = angles.size() + 1;
  require_rank(k);
  Vector x(static_cast<Eigen::Index>(k));
  double s = radius;
  for (Index j = 0; j + 1 < k; ++j) {
    x[static_cast<Eigen::Index>(j)] = s * std::cos(angles[j]);
    s *= std::sin(angles[j]);
  }
  x[static_cast<Eigen::Index>(k - 1)] = s;
  return x;
}

SphericalCoords cartesian_to_spherical(std::span<const double> x) {
  const Index k = x.size();
  require_rank(k);
  // tail[j] = |(x_j, ..., x_{K-1})|
  std::vector<double> tail(k + 1, 0.0);
  for (Index j = k; j-- > 0;) tail[j] = std::hypot(tail[j + 1], x[j]);
  if (tail[0] == 0.0) throw DataError("cannot convert the zero vector to spherical coordinates");

  SphericalCoords out;
  out.radius = tail[0];
  out.angles.resize(static_cast<Eigen::Index>(k - 1));
  for (Index j = 0; j + 2 < k; ++j) out.angles[static_cast<Eigen::Index>(j)] = std::atan2(tail[j + 1], x[j]);
  double last = std::atan2(x[k - 1], x[k - 2]);
  if (last < 0.0) last += 2.0 * std::numbers::pi;
  if (last >= 2.0 * std::numbers::pi) last = 0.0;
  out.angles[static_cast<Eigen::Index>(k - 2)] = last;
  return out;
}

FactorModel build_factors(const AngleState& angles, const MagnitudePair& mags, kernels::Backend backend) {
  const Index n = static_cast<Index>(angles.phi.rows());
  const Index m = static_cast<Index>(angles.theta.cols());
  const Index k = static_cast<Index>(angles.phi.cols()) + 1;
  require_rank(k);
  if (static_cast<Index>(angles.theta.rows()) + 1 != k) throw DimensionError("phi and theta disagree on K");
  if (static_cast<Index>(mags.r_w.size()) != n || static_cast<Index>(mags.r_h.size()) != m)
    throw DimensionError("magnitude vectors do not match angle matrices");

  const auto& ks = kernels::kernel_set(backend);
  FactorModel model;
  model.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  model.h.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
  ks.spherical_to_cartesian({angles.phi.data(), n * (k - 1)}, {mags.r_w.data(), n}, k, {model.w.data(), n * k});
  ks.spherical_to_cartesian({angles.theta.data(), m * (k - 1)}, {mags.r_h.data(), m}, k, {model.h.data(), m * k});
  model.magnitudes = mags;
  return model;
}

namespace {

DerivativeTensor derivative(const double* angles, Index n, Index k, const Vector& radii, kernels::Backend backend) {
  require_rank(k);
  if (static_cast<Index>(radii.size()) != n) throw DimensionError("magnitude vector does not match angle matrix");
  DerivativeTensor t(n, k);
  kernels::kernel_set(backend).derivative_tensor({angles, n * (k - 1)}, {radii.data(), n}, k, t.raw());
  return t;
}

}  // namespace

DerivativeTensor grad_w_wrt_phi(const RowMatrix& phi, const Vector& r_w, kernels::Backend backend) {
  return derivative(phi.data(), static_cast<Index>(phi.rows()), static_cast<Index>(phi.cols()) + 1, r_w, backend);
}

DerivativeTensor grad_h_wrt_theta(const ColMatrix& theta, const Vector& r_h, kernels::Backend backend) {
  return derivative(theta.data(), static_cast<Index>(theta.cols()), static_cast<Index>(theta.rows()) + 1, r_h,
                    backend);
}

Vector angle_partial_elementwise(std::span<const double> angles, double radius, Index b) {
  const Index k = angles.size() + 1;
  require_rank(k);
  if (b + 1 >= k) throw DimensionError("angle index out of range");
  // 1-based indices below follow the auxiliary-vector definitions.
  auto phi = [&](Index p) { return angles[p - 1]; };
  const Index bb = b + 1;
  double lead = 1.0;
  for (Index p = 1; p <= bb - 1; ++p) lead *= std::sin(phi(p));

  Vector dx(static_cast<Eigen::Index>(k));
  for (Index j = 1; j <= k; ++j) {
    double s = 0.0, c = 0.0;
    if (j < bb) {
      s = 0.0;
      c = 0.0;
    } else if (j == bb) {
      s = -std::sin(phi(bb));
      c = 1.0;
    } else {
      s = 1.0;
      for (Index p = bb + 1; p <= j - 1; ++p) s *= std::sin(phi(p));
      c = j < k ? std::cos(phi(j)) * std::cos(phi(bb)) : std::cos(phi(bb));
    }
    dx[static_cast<Eigen::Index>(j - 1)] = radius * lead * s * c;
  }
  return dx;
}

}  // namespace mbmf
