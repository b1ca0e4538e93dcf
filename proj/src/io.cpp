#include "qmlab/io.hpp"

#include <fstream>
#include <sstream>

#include "qmlab/error.hpp"

namespace qmlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  try {
    std::size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto fields = split_fields(s);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      require(t.rows.empty() && t.header.empty(), ErrorCode::kBadConfig,
              "non-numeric CSV field on line " + std::to_string(lineno));
      t.header = fields;
      width = fields.size();
      continue;
    }
    if (width == 0) width = row.size();
    require(row.size() == width, ErrorCode::kBadConfig, "ragged CSV row on line " + std::to_string(lineno));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::kIoFailure, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::kIoFailure, "cannot write '" + path + "'");
  f << text;
  require(static_cast<bool>(f), ErrorCode::kIoFailure, "write failed for '" + path + "'");
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

}  // namespace qmlab
