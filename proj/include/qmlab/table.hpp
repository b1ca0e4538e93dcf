#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qmlab {

// Rectangular result table with ordered metadata. Doubles are written with
// %.17g so that output is byte-stable and round-trips exactly.
struct ResultTable {
  using Cell = std::variant<std::int64_t, double, std::string>;

  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<Cell> row);  // throws kLengthMismatch on width mismatch
  void set_meta(const std::string& key, const std::string& value);
  std::size_t column(const std::string& name) const;  // throws kInvalidArgument
  double number(std::size_t row, const std::string& name) const;

  // '#'-prefixed metadata lines, a header line, then one line per row.
  std::string to_csv() const;
  std::string to_json() const;
};

std::string format_double(double v);

}  // namespace qmlab
