// csv.hpp - deterministic CSV formatting and small parsing helpers
//
// All file output in this project goes through format_double(), which uses
// std::to_chars shortest round-trip formatting.  That makes output files a
// pure function of the computed values: same run, same bytes.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sopjam {

// Shortest decimal string that round-trips to the exact double.  Infinities
// become "inf"/"-inf"; NaN becomes "nan".
std::string format_double(double v);

// Split one CSV line on commas (no quoting; our formats never need it).
std::vector<std::string> split_csv_line(std::string_view line);

// Parse helpers that throw std::runtime_error with context on failure.
double parse_double(std::string_view field, std::string_view context);
std::int64_t parse_int(std::string_view field, std::string_view context);

// Read a whole text file; throws std::runtime_error if unreadable.
std::string read_text_file(const std::string& path);

// Write a whole text file; throws std::runtime_error on failure.
void write_text_file(const std::string& path, std::string_view content);

struct CsvRow {
  int line = 0;  // 1-based line number in the file, for error messages
  std::vector<std::string> fields;
};

// Read a CSV file with an expected header line.  Throws if the header does
// not match exactly.  A completely empty file yields an empty row list when
// allow_empty is set, and an error otherwise.
std::vector<CsvRow> read_csv_rows(const std::string& path,
                                  std::string_view expected_header,
                                  bool allow_empty = false);

}  // namespace sopjam
