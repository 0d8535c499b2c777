#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bmt {

/// 17 significant digits, locale independent; nan and inf spelled out.
std::string format_number(double x);

/// In-memory table with a header row.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  void add_row(std::vector<std::string> cells);

  template <class... Cells>
  void add(const Cells&... cells) {
    add_row({cell(cells)...});
  }

  std::string str() const;
  void write(const std::filesystem::path& file) const;

 private:
  static std::string cell(double x) { return format_number(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(unsigned long x) { return std::to_string(x); }
  static std::string cell(unsigned long long x) { return std::to_string(x); }
  static std::string cell(bool x) { return x ? "pass" : "fail"; }
  static std::string cell(const std::string& x) { return x; }
  static std::string cell(const char* x) { return x; }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace bmt
