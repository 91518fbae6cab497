#include "mbmf/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mbmf {

namespace {

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) fail("unexpected end of file");
    ++line_no_;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  void expect(const std::string& tag) {
    if (line() != tag) fail("expected '" + tag + "'");
  }

  std::vector<std::string> words() {
    std::istringstream ss(line());
    std::vector<std::string> w;
    for (std::string t; ss >> t;) w.push_back(t);
    return w;
  }

  double real(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad number '" + s + "'");
    return v;
  }

  Index count(const std::string& s) {
    Index v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad count '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("model file line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  Index line_no_ = 0;
};

}  // namespace

void write_model(std::ostream& out, const ModelFile& file) {
  const auto& m = file.model;
  const Index n = m.n_rows(), mm = m.n_cols(), k = m.rank();
  if (file.row_labels.size() != n || file.col_labels.size() != mm)
    throw DimensionError("label maps do not match model dimensions");
  const auto old = out.precision(17);
  out << "mbmf-model " << kModelFormatVersion << '\n';
  out << "dims " << n << ' ' << mm << ' ' << k << '\n';
  out << "variant " << to_string(m.preprocess.variant) << '\n';
  out << "preprocess " << to_string(m.preprocess.data_type) << ' ' << to_string(m.preprocess.offset_kind) << ' '
      << m.preprocess.offset << ' ' << m.preprocess.r_min << ' ' << m.preprocess.r_max << '\n';
  out << "[row_labels]\n";
  for (const auto& l : file.row_labels) out << l << '\n';
  out << "[col_labels]\n";
  for (const auto& l : file.col_labels) out << l << '\n';
  out << "[r_w]\n";
  for (Eigen::Index i = 0; i < m.magnitudes.r_w.size(); ++i) out << m.magnitudes.r_w[i] << '\n';
  out << "[r_h]\n";
  for (Eigen::Index i = 0; i < m.magnitudes.r_h.size(); ++i) out << m.magnitudes.r_h[i] << '\n';
  out << "[w]\n";
  for (Eigen::Index i = 0; i < m.w.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.w.cols(); ++j) out << (j ? " " : "") << m.w(i, j);
    out << '\n';
  }
  out << "[h]\n";
  for (Eigen::Index c = 0; c < m.h.cols(); ++c) {
    for (Eigen::Index j = 0; j < m.h.rows(); ++j) out << (j ? " " : "") << m.h(j, c);
    out << '\n';
  }
  out.precision(old);
}

ModelFile read_model(std::istream& in) {
  Reader r(in);
  auto head = r.words();
  if (head.size() != 2 || head[0] != "mbmf-model") r.fail("not an mbmf model file");
  if (r.count(head[1]) != static_cast<Index>(kModelFormatVersion)) r.fail("unsupported format version " + head[1]);
  auto dims = r.words();
  if (dims.size() != 4 || dims[0] != "dims") r.fail("expected dims N M K");
  const Index n = r.count(dims[1]), m = r.count(dims[2]), k = r.count(dims[3]);

  ModelFile f;
  auto& rec = f.model.preprocess;
  auto variant = r.words();
  if (variant.size() != 2 || variant[0] != "variant") r.fail("expected variant");
  try {
    rec.variant = parse_variant(variant[1]);
    auto pre = r.words();
    if (pre.size() != 6 || pre[0] != "preprocess") r.fail("expected preprocess record");
    rec.data_type = parse_data_type(pre[1]);
    rec.offset_kind = parse_offset_kind(pre[2]);
    rec.offset = r.real(pre[3]);
    rec.r_min = r.real(pre[4]);
    rec.r_max = r.real(pre[5]);
  } catch (const DataError& e) {
    if (std::string(e.what()).starts_with("model file")) throw;
    r.fail(e.what());
  }

  r.expect("[row_labels]");
  for (Index i = 0; i < n; ++i) f.row_labels.push_back(r.line());
  r.expect("[col_labels]");
  for (Index i = 0; i < m; ++i) f.col_labels.push_back(r.line());

  auto read_vector = [&](const char* tag, Index len) {
    r.expect(tag);
    Vector v(static_cast<Eigen::Index>(len));
    for (Index i = 0; i < len; ++i) v[static_cast<Eigen::Index>(i)] = r.real(r.line());
    return v;
  };
  f.model.magnitudes.r_w = read_vector("[r_w]", n);
  f.model.magnitudes.r_h = read_vector("[r_h]", m);

  auto read_block = [&](const char* tag, Index count, auto&& store) {
    r.expect(tag);
    for (Index i = 0; i < count; ++i) {
      auto w = r.words();
      if (w.size() != k) r.fail("expected " + std::to_string(k) + " values");
      for (Index j = 0; j < k; ++j) store(i, j, r.real(w[j]));
    }
  };
  f.model.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  f.model.h.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
  read_block("[w]", n, [&](Index i, Index j, double v) {
    f.model.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
  });
  read_block("[h]", m, [&](Index c, Index j, double v) {
    f.model.h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = v;
  });
  return f;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, file);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_model(in);
}

}  // namespace mbmf
