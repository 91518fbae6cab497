#ifndef MBMF_TYPES_HPP
#define MBMF_TYPES_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mbmf {

using Index = std::size_t;

// W and the angle matrix Phi are stored row-major so that a latent row is
// contiguous; H and Theta are column-major so that a latent column is.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
using Vector = Eigen::VectorXd;

/// Raised when input data violates a documented precondition.
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when matrix/vector dimensions do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Angle matrices of the spherical parameterisation.
///   phi:   N x (K-1), one row of angles per latent user vector
///   theta: (K-1) x M, one column of angles per latent item vector
struct AngleState {
  RowMatrix phi;
  ColMatrix theta;

  Index rank() const { return static_cast<Index>(phi.cols()) + 1; }
};

/// Prescribed Euclidean norms of the latent rows of W and columns of H.
struct MagnitudePair {
  Vector r_w;
  Vector r_h;

  // Throws DataError if any component is non-positive or non-finite.
  void validate() const;
};

enum class Variant { centered, nonnegative };
enum class DataType { bounded_both, bounded_one_side, unbounded };
enum class OffsetKind { scalar, per_entry_rank1 };

/// How observations were transformed before training, so predictions can be
/// mapped back to the original scale.
struct PreprocessRecord {
  Variant variant = Variant::nonnegative;
  DataType data_type = DataType::bounded_both;
  OffsetKind offset_kind = OffsetKind::scalar;
  double offset = 0.0;  // used when offset_kind == scalar
  double r_min = 0.0;
  double r_max = 0.0;
};

/// W (N x K) and H (K x M) together with the magnitudes that generated them.
struct FactorModel {
  RowMatrix w;
  ColMatrix h;
  MagnitudePair magnitudes;
  PreprocessRecord preprocess;

  Index n_rows() const { return static_cast<Index>(w.rows()); }
  Index n_cols() const { return static_cast<Index>(h.cols()); }
  Index rank() const { return static_cast<Index>(w.cols()); }
};

std::string to_string(Variant v);
std::string to_string(DataType t);
std::string to_string(OffsetKind k);
Variant parse_variant(const std::string& s);
DataType parse_data_type(const std::string& s);
OffsetKind parse_offset_kind(const std::string& s);

}  // namespace mbmf

#endif  // MBMF_TYPES_HPP
