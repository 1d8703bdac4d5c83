#include "adjwalk/cli/output.hpp"

#include <charconv>
#include <cmath>

#include "adjwalk/error.hpp"

namespace adjwalk::cli {

std::string format_number(double v) {
  require(std::isfinite(v), "CSV values must be finite");
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& hash,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw Error(ErrorKind::Usage, "cannot write '" + path.string() + "'");
  out_ << "# manifest_hash=" << hash << "\r\n";
  for (const auto& h : header) text(h);
  end_row();
}

void CsvWriter::sep() {
  if (column_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::num(double v) {
  sep();
  out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::integer(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::text(std::string_view s) {
  sep();
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    out_ << s;
    return *this;
  }
  out_ << '"';
  for (char c : s) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

CsvWriter& CsvWriter::missing() {
  sep();
  return *this;
}

CsvWriter& CsvWriter::optional(double v) { return std::isfinite(v) ? num(v) : missing(); }

void CsvWriter::end_row() {
  if (column_ != columns_) throw Error(ErrorKind::Domain, "CSV row width does not match the header");
  out_ << "\r\n";
  column_ = 0;
}

void write_json(const std::filesystem::path& path, const std::string& hash, const nlohmann::ordered_json& body) {
  nlohmann::ordered_json j;
  j["manifest_hash"] = hash;
  for (const auto& [k, v] : body.items())
    if (k != "manifest_hash") j[k] = v;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Usage, "cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

}  // namespace adjwalk::cli
