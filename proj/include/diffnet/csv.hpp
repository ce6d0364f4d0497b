#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace diffnet {

/// Minimal CSV writer with fixed formatting so identical runs produce
/// byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path, int schema_version = 1)
      : out_(path) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path);
    out_ << "# schema_version " << schema_version << "\n";
  }

  void header(const std::string& line) { out_ << line << "\n"; }

  CsvWriter& field(long v) {
    sep();
    out_ << v;
    return *this;
  }

  CsvWriter& field(double v) {
    sep();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    out_ << buf;
    return *this;
  }

  CsvWriter& field(const std::string& v) {
    sep();
    out_ << v;
    return *this;
  }

  void end_row() {
    out_ << "\n";
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) out_ << ",";
    first_ = false;
  }

  std::ofstream out_;
  bool first_ = true;
};

}  // namespace diffnet
