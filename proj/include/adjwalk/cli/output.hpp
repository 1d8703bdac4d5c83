#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace adjwalk::cli {

// Shortest decimal form that round-trips; non-finite values are rejected.
std::string format_number(double v);

// RFC-4180 CSV preceded by one "# manifest_hash=<hex>" line. Missing values are empty fields.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::vector<std::string>& header);
  CsvWriter& num(double v);
  CsvWriter& integer(long long v);
  CsvWriter& text(std::string_view s);
  CsvWriter& missing();
  // Writes v when finite, an empty field otherwise.
  CsvWriter& optional(double v);
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::size_t column_ = 0;
};

// JSON file whose first key is manifest_hash.
void write_json(const std::filesystem::path& path, const std::string& hash, const nlohmann::ordered_json& body);

}  // namespace adjwalk::cli
