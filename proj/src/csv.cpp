#include "bmt/csv.hpp"

#include "bmt/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace bmt {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += quote(cells[i]);
  }
  out += '\n';
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw InvalidInput("csv: row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

void CsvTable::write(const std::filesystem::path& file) const {
  std::ofstream f(file, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open " + file.string());
  f << str();
}

}  // namespace bmt
