#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace kf::io {

/// Shortest decimal representation that round-trips a double (%.17g).
std::string format_double(double v);

/// CSV table with a header row; numeric cells are written with
/// format_double so reruns are byte-identical.
class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::vector<std::string> header);

  void row(const std::vector<std::string>& cells);
  void row_values(const std::vector<double>& values);

  /// Flushes and closes; throws IoError if the stream went bad.
  void close();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t columns_ = 0;
  bool closed_ = false;
};

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Creates the directory (and parents) if missing.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace kf::io
