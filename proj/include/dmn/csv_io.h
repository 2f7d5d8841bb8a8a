#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dmn {

/// Malformed or unusable input data. `row()` is the 1-based line number when known.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(row ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

namespace csv {

/// Splits one CSV line on commas, trimming surrounding whitespace and a trailing CR.
/// Quoted fields are not supported; none of the formats here need them.
std::vector<std::string_view> split(std::string_view line);

std::optional<double> parse_double(std::string_view field);

/// Shortest round-trip decimal representation; NaN/inf are written as empty fields.
std::string format(double value);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace csv
}  // namespace dmn
