#include "qmlab/table.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "qmlab/error.hpp"

namespace qmlab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ResultTable::add_row(std::vector<Cell> row) {
  require(row.size() == columns.size(), ErrorCode::kLengthMismatch,
          "row has " + std::to_string(row.size()) + " cells, table has " + std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

void ResultTable::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata)
    if (k == key) {
      v = value;
      return;
    }
  metadata.emplace_back(key, value);
}

std::size_t ResultTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  fail(ErrorCode::kInvalidArgument, "no column '" + name + "'");
}

double ResultTable::number(std::size_t row, const std::string& name) const {
  const Cell& c = rows.at(row).at(column(name));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  fail(ErrorCode::kInvalidArgument, "column '" + name + "' is not numeric");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const ResultTable::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string cell_json(const ResultTable::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? format_double(*d) : json_string(format_double(*d));
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return json_string(std::get<std::string>(c));
}

}  // namespace

std::string ResultTable::to_csv() const {
  std::string out;
  for (const auto& [k, v] : metadata) out += "# " + k + ": " + v + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_field(columns[i]);
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
    out += "\n";
  }
  return out;
}

std::string ResultTable::to_json() const {
  std::string out = "{\n  \"metadata\": {";
  for (std::size_t i = 0; i < metadata.size(); ++i)
    out += (i ? ", " : "") + json_string(metadata[i].first) + ": " + json_string(metadata[i].second);
  out += "},\n  \"columns\": [";
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? ", " : "") + json_string(columns[i]);
  out += "],\n  \"rows\": [";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += r ? ",\n    [" : "\n    [";
    for (std::size_t i = 0; i < rows[r].size(); ++i) out += (i ? ", " : "") + cell_json(rows[r][i]);
    out += "]";
  }
  out += rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

}  // namespace qmlab
