#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace carmm {

// Minimal comma-separated reader. Validates the header up front and reports
// failures as "<path>:<row>: <what>" so the CLI can point at the bad line.
class CsvReader {
 public:
  CsvReader(const std::string& path, const std::vector<std::string>& expected_header);

  bool next_row();  // false at EOF
  const std::vector<std::string>& fields() const { return fields_; }
  std::size_t field_count() const { return fields_.size(); }
  int current_row() const { return row_; }  // 1-based, header is row 1

  int int_field(std::size_t i) const;
  double double_field(std::size_t i) const;
  long long ll_field(std::size_t i) const;

  const std::vector<std::string>& header() const { return header_; }

 private:
  [[noreturn]] void fail(const std::string& what) const;

  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::vector<std::string> fields_;
  int row_ = 0;
};

// Writes to "<path>.tmp" and renames on close() so readers never observe a
// partial file. Doubles are printed round-trip exact.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();

  void field(const std::string& v);
  void field(int v);
  void field(long long v);
  void field(double v);
  void end_row();
  void close();

 private:
  std::string path_;
  std::string tmp_path_;
  std::ofstream out_;
  bool first_in_row_ = true;
  bool closed_ = false;
};

std::string format_double(double v);  // shortest round-trip representation

// Whole-file FNV-1a 64-bit content hash, hex encoded (manifest records).
std::string file_hash_hex(const std::string& path);

// Atomic text-file write (tmp + rename), used for JSON outputs.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace carmm
