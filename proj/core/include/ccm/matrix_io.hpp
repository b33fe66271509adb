#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ccm/types.hpp"

namespace ccm::io {

enum class MatrixFormat { kAuto, kCsv, kMatrixMarket };

/// "csv", "mm"/"matrix-market", or "auto". Throws std::invalid_argument.
MatrixFormat parse_format(std::string_view name);

/// Comma-separated rows, one per line. Blank lines and lines starting with
/// '#' are skipped. Throws ParseError (ragged rows, bad numbers) or
/// NonFinite (nan/inf, 1-based row and column).
Matrix parse_csv(std::istream& in);

/// Matrix Market "array" (general or symmetric) and "coordinate" files with
/// real or integer fields.
Matrix parse_matrix_market(std::istream& in);

/// kAuto picks Matrix Market when the file starts with "%%MatrixMarket".
Matrix read_matrix(const std::string& path, MatrixFormat format = MatrixFormat::kAuto);

/// "1,3,5" -> {0, 2, 4}. Whitespace around entries is ignored; an empty
/// string gives an empty set. Throws ParseError on malformed or zero indices.
std::vector<std::size_t> parse_index_list(std::string_view text);

/// Shortest text that reads back to the same double (at most 17 significant
/// digits).
std::string format_double(double v);

void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_vector(std::ostream& out, const Vector& v);

}  // namespace ccm::io
