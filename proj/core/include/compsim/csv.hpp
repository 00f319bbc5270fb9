#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace compsim::csv {

/// Splits one CSV line. Handles double-quoted fields with "" escapes;
/// no embedded newlines.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Shortest decimal form that round-trips a double.
std::string format_double(double v);

/// Reads a CSV file, checks the header exactly and returns the data rows.
/// Blank lines and lines starting with '#' are skipped. Throws DataError
/// with the offending line number on a column-count mismatch.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based, parallel to rows
};
Table read_file(const std::string& path, const std::vector<std::string>& expected_header);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

} // namespace compsim::csv
