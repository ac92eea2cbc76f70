#pragma once

// Delimited text reading and writing shared by every file format in the
// toolkit. Fields may be double-quoted; a doubled quote inside a quoted field
// is a literal quote. Lines starting with '#' are comments.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace disrupt::io {

struct DelimitedRow {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

/// Streams rows out of delimited text. The first non-comment row is the header.
class DelimitedReader {
 public:
  DelimitedReader(std::istream& in, std::string source_name, char delimiter = ',');

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::string& source() const noexcept { return source_; }

  /// Index of a header column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  /// Index of a header column; throws ParseError naming the missing column.
  std::size_t require_column(std::string_view name) const;

  /// Next data row, or nullopt at end of input. Rows may be shorter than the
  /// header (trailing optional columns); longer rows are a ParseError.
  std::optional<DelimitedRow> next();

 private:
  bool read_record(DelimitedRow& row);

  std::istream& in_;
  std::string source_;
  char delim_;
  std::size_t line_ = 0;
  std::vector<std::string> header_;
};

/// Splits one physical line. Throws ParseError on an unterminated quote.
std::vector<std::string> split_line(std::string_view line, char delimiter, const std::string& source,
                                    std::size_t line_no);

/// Writes one row, quoting fields that need it.
void write_row(std::ostream& out, std::span<const std::string> fields, char delimiter = ',');

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);
/// Empty string for absent values.
std::string format_optional(const std::optional<double>& value);

/// Parses a whole-field integer; throws ParseError with the given position.
std::int64_t parse_int(std::string_view text, const std::string& source, std::size_t line,
                       std::size_t column);
double parse_double(std::string_view text, const std::string& source, std::size_t line,
                    std::size_t column);

}  // namespace disrupt::io
