#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace resil {

// Raised for malformed or inconsistent input files; the CLI maps it to a
// distinct exit code so callers can tell bad data from internal failures.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// One parsed CSV row: the original 1-based line number plus its fields.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string_view> fields;
};

// Minimal CSV support: comma separation without quoting or escapes, which is
// all the pipeline's schemas use. Blank lines and '#' comment lines are
// skipped. Views point into `text`, which must outlive the rows.
std::vector<CsvRow> parse_csv(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Shortest round-trip decimal form; locale-independent and bit-stable, so
// repeated runs produce byte-identical artifacts.
std::string format_double(double v);

double parse_double_field(std::string_view s, const std::string& file, std::size_t line);
long long parse_int_field(std::string_view s, const std::string& file, std::size_t line);

}  // namespace resil
