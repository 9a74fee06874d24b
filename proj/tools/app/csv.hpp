#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace polydiff::app {

// Numeric CSV: comma separated, optional non-numeric header row skipped.
std::vector<std::vector<double>> read_csv(const std::filesystem::path& file);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& values);
  void row(std::vector<std::string> cells);
  std::string str() const;
  void save(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Shortest round-trip representation ("." decimal).
std::string format_number(double v);

}  // namespace polydiff::app
