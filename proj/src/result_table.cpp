#include "oposim/result_table.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "oposim/errors.hpp"

namespace oposim {

ResultTable::ResultTable(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
  meta_["table"] = name_;
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
  meta_[key] = value;
}

void ResultTable::set_meta(const std::string& key, double value) {
  meta_[key] = format_double(value);
}

void ResultTable::add_row(const std::vector<double>& values) {
  if (values.size() != columns_.size())
    throw ConfigError("row width does not match the column count");
  rows_.push_back(values);
}

std::string ResultTable::format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string ResultTable::to_string() const {
  std::ostringstream out;
  for (const auto& [key, value] : meta_) out << "# " << key << ": " << value << "\n";
  for (size_t i = 0; i < columns_.size(); ++i)
    out << columns_[i] << (i + 1 < columns_.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i)
      out << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
  return out.str();
}

void ResultTable::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << to_string();
}

void ResultTable::append_row(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ConfigError("cannot append to " + path);
  for (size_t i = 0; i < values.size(); ++i)
    out << format_double(values[i]) << (i + 1 < values.size() ? "," : "");
  out << "\n";
  out.flush();
}

ResultTable ResultTable::read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);

  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const size_t colon = line.find(':');
      if (colon != std::string::npos) {
        std::string key = line.substr(1, colon - 1);
        std::string value = line.substr(colon + 1);
        auto strip = [](std::string& s) {
          while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
          while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
        };
        strip(key);
        strip(value);
        meta[key] = value;
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    if (!header_seen) {
      columns = cells;
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::stod(c));
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ConfigError("no column header in " + path);

  ResultTable table(meta.count("table") ? meta["table"] : "unknown", columns);
  for (auto& [k, v] : meta) table.set_meta(k, v);
  for (auto& row : rows) table.add_row(row);
  return table;
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}
