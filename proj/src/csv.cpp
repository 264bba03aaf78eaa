#include "sopjam/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sopjam {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::string_view context) {
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::runtime_error("bad numeric field '" + std::string(field) +
                             "' in " + std::string(context));
  }
  return v;
}

std::int64_t parse_int(std::string_view field, std::string_view context) {
  std::int64_t v = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw std::runtime_error("bad integer field '" + std::string(field) +
                             "' in " + std::string(context));
  }
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error("read error on file: " + path);
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write error on file: " + path);
}

std::vector<CsvRow> read_csv_rows(const std::string& path,
                                  std::string_view expected_header,
                                  bool allow_empty) {
  std::string text = read_text_file(path);
  std::vector<CsvRow> rows;
  std::size_t pos = 0;
  int line_no = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line(text.data() + pos,
                          (eol == std::string::npos ? text.size() : eol) - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = (eol == std::string::npos) ? text.size() : eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != expected_header) {
        throw std::runtime_error("unexpected CSV header in " + path +
                                 ": got '" + std::string(line) +
                                 "', expected '" + std::string(expected_header) +
                                 "'");
      }
      saw_header = true;
      continue;
    }
    rows.push_back({line_no, split_csv_line(line)});
  }
  if (!saw_header && !allow_empty) {
    throw std::runtime_error("empty CSV file (no header): " + path);
  }
  return rows;
}

}  // namespace sopjam
