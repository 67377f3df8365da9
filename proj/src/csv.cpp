#include "resil/csv.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace resil {

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const std::size_t n = text.size();
  while (pos < n) {
    std::size_t eol = text.find('\n', pos);
    const std::size_t end = (eol == std::string_view::npos) ? n : eol;
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    pos = (eol == std::string_view::npos) ? n : eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    CsvRow row;
    row.line = line_no;
    std::size_t f = 0;
    while (true) {
      const std::size_t c = line.find(',', f);
      if (c == std::string_view::npos) {
        row.fields.push_back(line.substr(f));
        break;
      }
      row.fields.push_back(line.substr(f, c - f));
      f = c + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw input_error("read failure: " + path);
  return std::move(ss).str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failure: " + path);
}

std::string format_double(double v) {
  std::array<char, 40> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double_field(std::string_view s, const std::string& file, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw input_error(file + ":" + std::to_string(line) + ": not a number: '" + std::string(s) + "'");
  return v;
}

long long parse_int_field(std::string_view s, const std::string& file, std::size_t line) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw input_error(file + ":" + std::to_string(line) + ": not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace resil
