#include "disrupt/table_io.hpp"

#include <charconv>
#include <cmath>

#include "disrupt/error.hpp"

namespace disrupt::io {

std::vector<std::string> split_line(std::string_view line, char delimiter, const std::string& source,
                                    std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && cur.empty() && !field_was_quoted) {
      quoted = true;
      field_was_quoted = true;
    } else if (ch == delimiter) {
      out.push_back(std::move(cur));
      cur.clear();
      field_was_quoted = false;
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError(source, line_no, line.size() + 1, "unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

DelimitedReader::DelimitedReader(std::istream& in, std::string source_name, char delimiter)
    : in_(in), source_(std::move(source_name)), delim_(delimiter) {
  DelimitedRow row;
  if (!read_record(row)) throw ParseError(source_, 1, 1, "missing header row");
  header_ = std::move(row.fields);
}

bool DelimitedReader::read_record(DelimitedRow& row) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Tolerate a UTF-8 byte order mark.
    if (line_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty() || line.front() == '#') continue;
    row.line = line_;
    row.fields = split_line(line, delim_, source_, line_);
    return true;
  }
  return false;
}

std::optional<std::size_t> DelimitedReader::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  return std::nullopt;
}

std::size_t DelimitedReader::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw ParseError(source_, 1, 1, "missing required column '" + std::string(name) + "'");
}

std::optional<DelimitedRow> DelimitedReader::next() {
  DelimitedRow row;
  if (!read_record(row)) return std::nullopt;
  if (row.fields.size() > header_.size())
    throw ParseError(source_, row.line, header_.size() + 1,
                     "row has " + std::to_string(row.fields.size()) + " fields, header has " +
                         std::to_string(header_.size()));
  return row;
}

void write_row(std::ostream& out, std::span<const std::string> fields, char delimiter) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out.put(delimiter);
    first = false;
    const bool needs_quotes = f.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
    if (!needs_quotes) {
      out << f;
      continue;
    }
    out.put('"');
    for (char ch : f) {
      if (ch == '"') out.put('"');
      out.put(ch);
    }
    out.put('"');
  }
  out.put('\n');
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string{};
}

std::int64_t parse_int(std::string_view text, const std::string& source, std::size_t line,
                       std::size_t column) {
  std::int64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
    throw ParseError(source, line, column, "expected integer, got '" + std::string(text) + "'");
  return v;
}

double parse_double(std::string_view text, const std::string& source, std::size_t line,
                    std::size_t column) {
  double v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
    throw ParseError(source, line, column, "expected number, got '" + std::string(text) + "'");
  return v;
}

}  // namespace disrupt::io
