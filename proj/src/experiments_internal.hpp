#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qmlab/rng.hpp"
#include "qmlab/table.hpp"

namespace qmlab::detail {

using Json = nlohmann::json;

// Declared defaults merged with user values; getters raise kBadConfig.
class Params {
 public:
  explicit Params(Json merged) : j_(std::move(merged)) {}
  const Json& json() const { return j_; }

  int integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;

  int positive(const std::string& key) const;  // integer >= 1

 private:
  Json j_;
};

struct RunContext {
  Params params;
  Rng rng;
  int threads = 1;
};

struct ExperimentDef {
  std::string name;
  std::string summary;
  Json defaults;
  std::function<ResultTable(RunContext&)> run;
};

void add_quantum_experiments(std::vector<ExperimentDef>& out);
void add_variational_experiments(std::vector<ExperimentDef>& out);
void add_learning_experiments(std::vector<ExperimentDef>& out);

using Row = std::vector<ResultTable::Cell>;
inline ResultTable::Cell cell(int v) { return static_cast<std::int64_t>(v); }
inline ResultTable::Cell cell(std::int64_t v) { return v; }
inline ResultTable::Cell cell(std::uint64_t v) { return static_cast<std::int64_t>(v); }
inline ResultTable::Cell cell(double v) { return v; }
inline ResultTable::Cell cell(std::string v) { return v; }
inline ResultTable::Cell cell(const char* v) { return std::string(v); }

template <typename... T>
Row row(T&&... v) {
  return Row{cell(std::forward<T>(v))...};
}

}  // namespace qmlab::detail
