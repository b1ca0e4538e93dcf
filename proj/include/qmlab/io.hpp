#pragma once

#include <string>
#include <vector>

namespace qmlab {

struct CsvTable {
  std::vector<std::string> header;  // empty when the first row is numeric
  std::vector<std::vector<double>> rows;
};

// Comma-separated numbers, one sample per row; blank lines and lines starting
// with '#' are skipped. Throws kBadConfig on ragged or non-numeric rows.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);  // kIoFailure when unreadable

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace qmlab
