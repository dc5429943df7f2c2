#include "kfield/model_file.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kfield/errors.hpp"
#include "kfield/numfmt.hpp"

namespace kfield {

namespace {

constexpr const char* kMagic = "kernel-field-model";

void write_matrix(std::ostream& out, const char* tag, const Eigen::MatrixXd& m) {
  out << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
    out << '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> tokens() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      std::istringstream ss{std::string(t)};
      std::vector<std::string> out;
      for (std::string tok; ss >> tok;) out.push_back(tok);
      return out;
    }
    throw ParseError("unexpected end of model file", line_ + 1);
  }

  std::string keyed(const std::string& key) {
    const auto t = tokens();
    if (t.size() != 2 || t[0] != key) throw ParseError("expected '" + key + " <value>'", line_);
    return t[1];
  }

  double number(const std::string& text) {
    double v = 0.0;
    if (!parse_double(text, v)) throw ParseError("bad number '" + text + "'", line_);
    return v;
  }

  long integer(const std::string& text) {
    long v = 0;
    if (!parse_long(text, v)) throw ParseError("bad integer '" + text + "'", line_);
    return v;
  }

  Eigen::MatrixXd matrix(const std::string& tag) {
    const auto head = tokens();
    if (head.size() != 3 || head[0] != tag) throw ParseError("expected '" + tag + " <rows> <cols>'", line_);
    const long rows = integer(head[1]);
    const long cols = integer(head[2]);
    if (rows < 0 || cols < 0) throw SchemaError(tag + ": negative dimensions");
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i) {
      const auto row = tokens();
      if (static_cast<long>(row.size()) != cols) {
        throw SchemaError("line " + std::to_string(line_) + ": " + tag + " row has " + std::to_string(row.size()) +
                          " entries, expected " + std::to_string(cols));
      }
      for (long j = 0; j < cols; ++j) m(i, j) = number(row[static_cast<std::size_t>(j)]);
    }
    return m;
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

void write_model(std::ostream& out, const ModelFile& file) {
  out << kMagic << ' ' << ModelFile::kVersion << '\n';
  out << "config_hash " << (file.config_hash.empty() ? "-" : file.config_hash) << '\n';
  out << "seed " << file.seed << '\n';
  out << "family " << to_string(file.kernel.family) << '\n';
  out << "bandwidth " << format_double(file.kernel.bandwidth) << '\n';
  out << "period " << format_double(file.kernel.period) << '\n';
  out << "input_dim " << file.kernel.input_dim << '\n';
  Eigen::MatrixXd c(static_cast<Eigen::Index>(file.centers.size()), file.kernel.input_dim);
  for (std::size_t i = 0; i < file.centers.size(); ++i) c.row(static_cast<Eigen::Index>(i)) = file.centers[i].transpose();
  write_matrix(out, "centers", c);
  write_matrix(out, "A", file.model.A);
  write_matrix(out, "Q", file.model.Q);
  out << "end\n";
}

ModelFile read_model(std::istream& in) {
  LineReader r(in);
  ModelFile f;
  const auto magic = r.tokens();
  if (magic.size() != 2 || magic[0] != kMagic) throw ParseError("not a kernel-field model file", r.line());
  if (r.integer(magic[1]) != ModelFile::kVersion) throw SchemaError("unsupported model file version " + magic[1]);
  f.config_hash = r.keyed("config_hash");
  if (f.config_hash == "-") f.config_hash.clear();
  f.seed = static_cast<std::uint64_t>(r.integer(r.keyed("seed")));
  try {
    f.kernel.family = parse_kernel_family(r.keyed("family"));
  } catch (const InputError& e) {
    throw ParseError(e.what(), r.line());
  }
  f.kernel.bandwidth = r.number(r.keyed("bandwidth"));
  f.kernel.period = r.number(r.keyed("period"));
  f.kernel.input_dim = static_cast<int>(r.integer(r.keyed("input_dim")));
  const Eigen::MatrixXd c = r.matrix("centers");
  if (c.cols() != f.kernel.input_dim) throw SchemaError("centers do not match input_dim");
  for (Eigen::Index i = 0; i < c.rows(); ++i) f.centers.push_back(c.row(i).transpose());
  f.model.A = r.matrix("A");
  f.model.Q = r.matrix("Q");
  const auto end = r.tokens();
  if (end.size() != 1 || end[0] != "end") throw ParseError("expected 'end'", r.line());
  if (f.model.A.rows() != c.rows()) throw SchemaError("A size does not match center count");
  try {
    f.kernel.validate();
    f.model.validate();
  } catch (const InputError& e) {
    throw SchemaError(std::string("model file: ") + e.what());
  }
  return f;
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_model(out, file);
  if (!out) throw IoError("write failed for " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  return read_model(in);
}

}  // namespace kfield
