#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace soilfusion::io {

// Shortest decimal form that round-trips to the same double.
std::string format_shortest(double v);

// Fixed-point with `decimals` digits after the point ("-0.000000" becomes "0.000000").
std::string format_fixed(double v, int decimals);

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

std::vector<std::string_view> split(std::string_view line, char delim);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Files staged in memory and written only by commit(), so a failing command
// leaves no partial output behind.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

  void commit() const;

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace soilfusion::io
