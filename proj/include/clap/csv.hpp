#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace clap {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Comma-separated file with optional leading '#' comment lines and one header
// row. No quoting; fields never contain commas in this project's formats.
struct CsvFile {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws CsvError when missing
};

CsvFile read_csv(const std::filesystem::path& path);

double csv_to_double(const std::string& field);

}  // namespace clap
