#include <svmlab/core.hpp>
#include <svmlab/io.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace svmlab {

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw InputError("result table: row has " + std::to_string(row.size()) + " cells, header has " +
                     std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  std::string s(buf, res.ptr);
  // Keep doubles distinguishable from integers on the way back in.
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

Cell parse_cell(const std::string& text, bool quoted);

// Text that would read back as a number is quoted too, so strings survive a round trip.
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && !s.empty() &&
      std::holds_alternative<std::string>(parse_cell(s, false))) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

Cell parse_cell(const std::string& text, bool quoted) {
  if (quoted) return text;
  std::int64_t i = 0;
  const char* end = text.data() + text.size();
  if (auto r = std::from_chars(text.data(), end, i); r.ec == std::errc{} && r.ptr == end && !text.empty()) return i;
  // Integer-looking text outside the int64 range stays text (e.g. 64-bit seeds).
  if (!text.empty() && text.find_first_not_of("-0123456789") == std::string::npos) return text;
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double d = 0.0;
  if (auto r = std::from_chars(text.data(), end, d); r.ec == std::errc{} && r.ptr == end && !text.empty()) return d;
  return text;
}

}  // namespace

std::string format_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return quote(std::get<std::string>(cell));
}

std::string to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += quote(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

ResultTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::pair<std::string, bool>>> records;
  std::vector<std::pair<std::string, bool>> record;
  std::string field;
  bool quoted = false;
  bool in_quotes = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (in_quotes) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
      quoted = true;
    } else if (c == ',') {
      record.emplace_back(std::move(field), quoted);
      field.clear();
      quoted = false;
    } else if (c == '\n') {
      record.emplace_back(std::move(field), quoted);
      records.push_back(std::move(record));
      record.clear();
      field.clear();
      quoted = false;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw InputError("parse_csv: unterminated quoted field");
  if (!field.empty() || !record.empty()) {
    record.emplace_back(std::move(field), quoted);
    records.push_back(std::move(record));
  }
  if (records.empty()) throw InputError("parse_csv: missing header");

  ResultTable table;
  for (auto& [name, q] : records.front()) table.columns.push_back(name);
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    for (auto& [value, q] : records[r]) row.push_back(parse_cell(value, q));
    table.add_row(std::move(row));
  }
  return table;
}

void write_results(const ResultTable& table, const std::filesystem::path& path) {
  const std::string text = to_csv(table);
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

ResultTable read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

}  // namespace svmlab
