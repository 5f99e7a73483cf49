#include "kf/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "kf/errors.hpp"

namespace kf::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvFile::CsvFile(const std::filesystem::path& path,
                 std::vector<std::string> header)
    : path_(path.string()), columns_(header.size()) {
  if (header.empty()) throw IoError("csv header must not be empty");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += header[i];
  }
  buffer_ += '\n';
}

void CsvFile::row(const std::vector<std::string>& cells) {
  if (closed_) throw IoError("csv file already closed: " + path_);
  if (cells.size() != columns_) {
    throw IoError("csv row width mismatch in " + path_);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += cells[i];
  }
  buffer_ += '\n';
}

void CsvFile::row_values(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

void CsvFile::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(path_, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path_);
  out << buffer_;
  out.flush();
  if (!out) throw IoError("write failed: " + path_);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir.string());
}

}  // namespace kf::io
