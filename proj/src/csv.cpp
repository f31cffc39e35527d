#include "carmm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>

#include "carmm/errors.hpp"

namespace carmm {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CsvReader::CsvReader(const std::string& path, const std::vector<std::string>& expected_header)
    : path_(path), in_(path) {
  if (!in_.is_open()) throw DataError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in_, line)) throw DataError(path + ":1: empty file, expected header");
  row_ = 1;
  header_ = split_commas(line);
  if (!expected_header.empty()) {
    if (header_.size() < expected_header.size()) fail("header has too few columns");
    for (std::size_t i = 0; i < expected_header.size(); ++i) {
      if (header_[i] != expected_header[i])
        fail("expected header column '" + expected_header[i] + "', found '" + header_[i] + "'");
    }
  }
}

bool CsvReader::next_row() {
  std::string line;
  while (std::getline(in_, line)) {
    ++row_;
    if (line.empty() || line == "\r") continue;
    fields_ = split_commas(line);
    if (fields_.size() != header_.size())
      fail("expected " + std::to_string(header_.size()) + " fields, found " +
           std::to_string(fields_.size()));
    return true;
  }
  return false;
}

int CsvReader::int_field(std::size_t i) const {
  long long v = ll_field(i);
  if (v < INT32_MIN || v > INT32_MAX) fail("value out of range in column " + std::to_string(i));
  return static_cast<int>(v);
}

long long CsvReader::ll_field(std::size_t i) const {
  if (i >= fields_.size()) fail("missing column " + std::to_string(i));
  const std::string& s = fields_[i];
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail("'" + s + "' is not an integer");
  return v;
}

double CsvReader::double_field(std::size_t i) const {
  if (i >= fields_.size()) fail("missing column " + std::to_string(i));
  const std::string& s = fields_[i];
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail("'" + s + "' is not a number");
  return v;
}

void CsvReader::fail(const std::string& what) const {
  throw DataError(path_ + ":" + std::to_string(row_) + ": " + what);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), tmp_path_(path + ".tmp"), out_(tmp_path_) {
  if (!out_.is_open()) throw DataError(tmp_path_ + ": cannot open for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

CsvWriter::~CsvWriter() {
  if (!closed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_path_, ec);  // abandoned writer leaves nothing behind
  }
}

void CsvWriter::field(const std::string& v) {
  if (!first_in_row_) out_ << ',';
  out_ << v;
  first_in_row_ = false;
}

void CsvWriter::field(int v) { field(std::to_string(v)); }
void CsvWriter::field(long long v) { field(std::to_string(v)); }
void CsvWriter::field(double v) { field(format_double(v)); }

void CsvWriter::end_row() {
  out_ << '\n';
  first_in_row_ = true;
}

void CsvWriter::close() {
  if (closed_) return;
  out_.close();
  if (!out_) throw DataError(tmp_path_ + ": write failed");
  std::filesystem::rename(tmp_path_, path_);
  closed_ = true;
}

std::string format_double(double v) {
  char buf[64];
  // shortest representation that round-trips
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (v != v && back != back)) break;
  }
  return buf;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw DataError(path + ": cannot open file");
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out.is_open()) throw DataError(tmp + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError(tmp + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw DataError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace carmm
