#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace svmlab {

using Cell = std::variant<std::int64_t, double, std::string>;

/// Header plus rows with a fixed column count.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws InputError when the row width differs from the header.
  void add_row(std::vector<Cell> row);
};

/// Integers in decimal, doubles with 17
/// significant digits ("nan", "inf", "-inf" for non-finite values). Strings
/// that are empty, contain a comma, quote or newline, or would read back as a
/// number are quoted.
std::string format_cell(const Cell& cell);

/// Comma-separated text with LF line endings.
std::string to_csv(const ResultTable& table);

/// Parses to_csv output. Cells parse as integer, then double, then string.
ResultTable parse_csv(const std::string& text);

/// Writes through a temporary file in the same directory and renames it over
/// `path`. Throws IoError when the file cannot be written.
void write_results(const ResultTable& table, const std::filesystem::path& path);

/// Throws IoError when the file cannot be read.
ResultTable read_results(const std::filesystem::path& path);

}  // namespace svmlab
