#include "app/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace polydiff::app {

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<std::vector<double>> read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    bool numeric = true;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      double v = 0.0;
      if (!parse_double(std::string_view(line).substr(start, comma - start), v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
      start = comma + 1;
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw std::runtime_error(file.string() + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(format_number(v));
  row(std::move(cells));
}

void CsvWriter::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::logic_error("csv row width mismatch");
  rows_.push_back(std::move(cells));
}

std::string CsvWriter::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
  os << '\n';
  for (const auto& r : rows_) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  return os.str();
}

void CsvWriter::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << str();
}

}  // namespace polydiff::app
