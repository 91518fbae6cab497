#include "mbmf/types.hpp"

namespace mbmf {

std::string to_string(Variant v) { return v == Variant::centered ? "centered" : "nonnegative"; }

std::string to_string(DataType t) {
  switch (t) {
    case DataType::bounded_both: return "bounded_both";
    case DataType::bounded_one_side: return "bounded_one_side";
    case DataType::unbounded: return "unbounded";
  }
  return "unknown";
}

std::string to_string(OffsetKind k) { return k == OffsetKind::scalar ? "scalar" : "per_entry_rank1"; }

Variant parse_variant(const std::string& s) {
  if (s == "centered" || s == "c") return Variant::centered;
  if (s == "nonnegative" || s == "n") return Variant::nonnegative;
  throw DataError("unknown variant '" + s + "'");
}

DataType parse_data_type(const std::string& s) {
  if (s == "bounded_both") return DataType::bounded_both;
  if (s == "bounded_one_side") return DataType::bounded_one_side;
  if (s == "unbounded") return DataType::unbounded;
  throw DataError("unknown data type '" + s + "'");
}

OffsetKind parse_offset_kind(const std::string& s) {
  if (s == "scalar") return OffsetKind::scalar;
  if (s == "per_entry_rank1") return OffsetKind::per_entry_rank1;
  throw DataError("unknown offset kind '" + s + "'");
}

}  // namespace mbmf
