#include "ccm/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ccm/errors.hpp"

namespace ccm::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Parses one field; non-finite values are returned as such for the caller
// to report with coordinates.
bool parse_number(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

MatrixFormat parse_format(std::string_view name) {
  const std::string n = lower(name);
  if (n == "auto") return MatrixFormat::kAuto;
  if (n == "csv") return MatrixFormat::kCsv;
  if (n == "mm" || n == "mtx" || n == "matrix-market") return MatrixFormat::kMatrixMarket;
  throw std::invalid_argument("unknown matrix format '" + std::string(name) + "'");
}

Matrix parse_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view, ',');
    if (!rows.empty() && fields.size() != rows.front().size()) {
      throw ParseError("expected " + std::to_string(rows.front().size()) +
                           " columns, found " + std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_number(fields[c], row[c])) {
        throw ParseError("cannot parse '" + std::string(trim(fields[c])) + "' as a number",
                         line_no);
      }
      if (!std::isfinite(row[c])) throw NonFinite(rows.size() + 1, c + 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return m;
}

Matrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market file", 1);
  ++line_no;
  const std::string lowered = lower(line);
  const auto header = split_ws(lowered);
  if (header.size() < 5 || header[0] != "%%matrixmarket" || header[1] != "matrix") {
    throw ParseError("missing %%MatrixMarket matrix header", line_no);
  }
  const std::string layout(header[2]);
  const std::string field(header[3]);
  const std::string symmetry(header[4]);
  if (layout != "array" && layout != "coordinate") {
    throw ParseError("unsupported layout '" + layout + "'", line_no);
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw ParseError("unsupported field '" + field + "'", line_no);
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") {
    throw ParseError("unsupported symmetry '" + symmetry + "'", line_no);
  }

  // Remaining non-comment lines as whitespace-separated tokens.
  auto next_tokens = [&]() -> std::vector<std::string_view> {
    while (std::getline(in, line)) {
      ++line_no;
      const auto view = trim(line);
      if (view.empty() || view.front() == '%') continue;
      return split_ws(line);
    }
    return {};
  };
  auto as_size = [&](std::string_view tok) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError("bad integer '" + std::string(tok) + "'", line_no);
    }
    return v;
  };
  auto as_value = [&](std::string_view tok, std::size_t r, std::size_t c) {
    double v = 0.0;
    if (!parse_number(tok, v)) throw ParseError("bad value '" + std::string(tok) + "'", line_no);
    if (!std::isfinite(v)) throw NonFinite(r + 1, c + 1);
    return v;
  };

  const auto size = next_tokens();
  if (size.size() < 2) throw ParseError("missing size line", line_no);
  const std::size_t rows = as_size(size[0]);
  const std::size_t cols = as_size(size[1]);
  if (symmetric && rows != cols) throw ParseError("symmetric matrix must be square", line_no);
  Matrix m = Matrix::Zero(static_cast<Index>(rows), static_cast<Index>(cols));

  if (layout == "array") {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t r = symmetric ? c : 0; r < rows; ++r) {
        const auto tok = next_tokens();
        if (tok.empty()) throw ParseError("unexpected end of data", line_no);
        const double v = as_value(tok[0], r, c);
        m(static_cast<Index>(r), static_cast<Index>(c)) = v;
        if (symmetric) m(static_cast<Index>(c), static_cast<Index>(r)) = v;
      }
    }
    return m;
  }

  if (size.size() < 3) throw ParseError("coordinate size line needs an entry count", line_no);
  const std::size_t entries = as_size(size[2]);
  for (std::size_t k = 0; k < entries; ++k) {
    const auto tok = next_tokens();
    if (tok.size() < 3) throw ParseError("expected 'row col value'", line_no);
    const std::size_t r = as_size(tok[0]);
    const std::size_t c = as_size(tok[1]);
    if (r == 0 || c == 0 || r > rows || c > cols) {
      throw ParseError("entry index out of range", line_no);
    }
    const double v = as_value(tok[2], r - 1, c - 1);
    m(static_cast<Index>(r - 1), static_cast<Index>(c - 1)) = v;
    if (symmetric) m(static_cast<Index>(c - 1), static_cast<Index>(r - 1)) = v;
  }
  return m;
}

Matrix read_matrix(const std::string& path, MatrixFormat format) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open '" + path + "'");
  // Read everything first so non-seekable inputs such as pipes work.
  std::stringstream in;
  in << file.rdbuf();
  if (format == MatrixFormat::kAuto) {
    format = lower(in.str().substr(0, 14)) == "%%matrixmarket" ? MatrixFormat::kMatrixMarket
                                                               : MatrixFormat::kCsv;
  }
  return format == MatrixFormat::kMatrixMarket ? parse_matrix_market(in) : parse_csv(in);
}

std::vector<std::size_t> parse_index_list(std::string_view text) {
  std::vector<std::size_t> out;
  if (trim(text).empty()) return out;
  for (auto field : split(text, ',')) {
    field = trim(field);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || v == 0) {
      throw ParseError("bad 1-based index '" + std::string(field) + "'", 1);
    }
    out.push_back(v - 1);
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

}  // namespace ccm::io
