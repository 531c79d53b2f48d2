#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oposim {

// Column-oriented records with a '#'-prefixed metadata header. Output is
// byte-identical for identical content; all numbers print with %.17g.
class ResultTable {
 public:
  ResultTable(std::string name, std::vector<std::string> columns);

  void set_meta(const std::string& key, const std::string& value);
  void set_meta(const std::string& key, double value);

  void add_row(const std::vector<double>& values);
  int row_count() const { return static_cast<int>(rows_.size()); }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::map<std::string, std::string>& meta() const { return meta_; }

  std::string to_string() const;
  void write_file(const std::string& path) const;

  // Append one data row to an existing file (incremental sweep flushes).
  static void append_row(const std::string& path, const std::vector<double>& values);

  static ResultTable read_file(const std::string& path);

  static std::string format_double(double value);

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::map<std::string, std::string> meta_;
  std::vector<std::vector<double>> rows_;
};

// FNV-1a hash of a byte string; keys sweep resume points to their config.
std::uint64_t fnv1a_hash(const std::string& bytes);

}
