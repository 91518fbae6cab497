#ifndef MBMF_MODEL_IO_HPP
#define MBMF_MODEL_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbmf/types.hpp"

namespace mbmf {

/// A trained model with the id maps needed to report predictions in the
/// original labels.
struct ModelFile {
  FactorModel model;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

inline constexpr int kModelFormatVersion = 1;

/// Versioned text format:
///
///   mbmf-model <version>
///   dims <N> <M> <K>
///   variant <centered|nonnegative>
///   preprocess <data_type> <offset_kind> <offset> <r_min> <r_max>
///   [row_labels]   N lines
///   [col_labels]   M lines
///   [r_w]          N lines
///   [r_h]          M lines
///   [w]            N lines of K values (rows of W)
///   [h]            M lines of K values (columns of H)
///
/// Reals use 17 significant digits, so parse(serialize(m)) is exact.
void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace mbmf

#endif  // MBMF_MODEL_IO_HPP
