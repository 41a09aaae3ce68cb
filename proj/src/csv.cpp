#include "clap/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace clap {

int CsvFile::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw CsvError("csv column '" + name + "' not found");
}

CsvFile read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw CsvError("cannot open csv file: " + path.string());
  CsvFile out;
  std::string line;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      out.comments.push_back(line);
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (!header_seen) {
      out.header = std::move(fields);
      header_seen = true;
    } else {
      if (fields.size() != out.header.size())
        throw CsvError("csv row width mismatch in " + path.string());
      out.rows.push_back(std::move(fields));
    }
  }
  if (!header_seen) throw CsvError("csv file has no header: " + path.string());
  return out;
}

double csv_to_double(const std::string& field) {
  double v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw CsvError("csv field is not a number: '" + field + "'");
  return v;
}

}  // namespace clap
