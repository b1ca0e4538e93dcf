#include "qmlab/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

#include "experiments_internal.hpp"
#include "qmlab/error.hpp"
#include "qmlab/parallel.hpp"

namespace qmlab {

using detail::ExperimentDef;
using detail::Json;

namespace detail {

namespace {

const Json& lookup(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  require(it != j.end(), ErrorCode::kBadConfig, "missing parameter '" + key + "'");
  return *it;
}

[[noreturn]] void bad_type(const std::string& key, const char* want) {
  fail(ErrorCode::kBadConfig, "parameter '" + key + "' must be " + want);
}

}  // namespace

int Params::integer(const std::string& key) const {
  const Json& v = lookup(j_, key);
  if (!v.is_number_integer()) bad_type(key, "an integer");
  return v.get<int>();
}

double Params::real(const std::string& key) const {
  const Json& v = lookup(j_, key);
  if (!v.is_number()) bad_type(key, "a number");
  return v.get<double>();
}

bool Params::flag(const std::string& key) const {
  const Json& v = lookup(j_, key);
  if (!v.is_boolean()) bad_type(key, "a boolean");
  return v.get<bool>();
}

std::string Params::text(const std::string& key) const {
  const Json& v = lookup(j_, key);
  if (!v.is_string()) bad_type(key, "a string");
  return v.get<std::string>();
}

std::vector<int> Params::integers(const std::string& key) const {
  const Json& v = lookup(j_, key);
  if (!v.is_array()) bad_type(key, "an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) bad_type(key, "an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::vector<double> Params::reals(const std::string& key) const {
  const Json& v = lookup(j_, key);
  if (!v.is_array()) bad_type(key, "an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad_type(key, "an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

int Params::positive(const std::string& key) const {
  const int v = integer(key);
  require(v >= 1, ErrorCode::kBadConfig, "parameter '" + key + "' must be >= 1");
  return v;
}

}  // namespace detail

namespace {

const std::vector<ExperimentDef>& registry() {
  static const std::vector<ExperimentDef> defs = [] {
    std::vector<ExperimentDef> d;
    detail::add_quantum_experiments(d);
    detail::add_variational_experiments(d);
    detail::add_learning_experiments(d);
    return d;
  }();
  return defs;
}

const ExperimentDef* find(const std::string& name) {
  for (const auto& d : registry())
    if (d.name == name) return &d;
  return nullptr;
}

// Loose kind of a JSON value for type checks against defaults.
std::string kind(const Json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "null";
}

bool compatible(const Json& def, const Json& v) {
  if (def.is_number_float()) return v.is_number();
  if (def.is_array() && v.is_array()) {
    if (def.empty() || v.empty()) return true;
    for (const auto& e : v)
      if (!compatible(def.front(), e)) return false;
    return true;
  }
  return kind(def) == kind(v);
}

struct Problem {
  ErrorCode code;
  Diagnostic diag;
};

struct Checked {
  std::optional<ExperimentConfig> cfg;
  std::vector<Problem> errors;
  std::vector<Diagnostic> warnings;
};

void error(Checked& c, ErrorCode code, const std::string& msg) {
  c.errors.push_back({code, {Diagnostic::Level::kError, msg}});
}

void warn(Checked& c, const std::string& msg) { c.warnings.push_back({Diagnostic::Level::kWarning, msg}); }

// Merges `user` into the experiment defaults, reporting unknown keys and
// type mismatches.
Json merge_params(const ExperimentDef& def, const Json& user, Checked* c) {
  Json merged = def.defaults;
  for (const auto& [key, value] : user.items()) {
    const auto it = def.defaults.find(key);
    if (it == def.defaults.end()) {
      if (c) warn(*c, "unknown key 'params." + key + "' (ignored)");
      continue;
    }
    if (!compatible(*it, value)) {
      const std::string msg = "parameter '" + key + "' must be " + kind(*it) + ", got " + kind(value);
      if (c)
        error(*c, ErrorCode::kBadConfig, msg);
      else
        fail(ErrorCode::kBadConfig, msg);
      continue;
    }
    merged[key] = value;
  }
  return merged;
}

Checked check(const std::string& text, std::optional<std::uint64_t> seed_override) {
  Checked c;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    error(c, ErrorCode::kBadConfig, std::string("malformed JSON: ") + e.what());
    return c;
  }
  if (!j.is_object()) {
    error(c, ErrorCode::kBadConfig, "config must be a JSON object");
    return c;
  }
  static const std::vector<std::string> kKeys{"experiment", "seed", "params", "format", "out", "threads"};
  for (const auto& [key, value] : j.items())
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) warn(c, "unknown key '" + key + "' (ignored)");

  ExperimentConfig cfg;
  const ExperimentDef* def = nullptr;
  if (!j.contains("experiment") || !j["experiment"].is_string()) {
    error(c, ErrorCode::kBadConfig, "'experiment' must be a string naming an experiment");
  } else {
    cfg.experiment = j["experiment"].get<std::string>();
    def = find(cfg.experiment);
    if (!def) error(c, ErrorCode::kUnknownExperiment, "unknown experiment '" + cfg.experiment + "'");
  }
  if (seed_override) {
    if (j.contains("seed") && !j["seed"].is_number_unsigned())
      warn(c, "'seed' is not a non-negative integer (overridden)");
    cfg.seed = *seed_override;
  } else if (!j.contains("seed")) {
    error(c, ErrorCode::kBadConfig, "missing 'seed'");
  } else if (!j["seed"].is_number_unsigned()) {
    error(c, ErrorCode::kBadConfig, "'seed' must be a non-negative integer");
  } else {
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) {
      error(c, ErrorCode::kBadConfig, "'params' must be an object");
    } else {
      cfg.params_json = j["params"].dump();
      if (def) merge_params(*def, j["params"], &c);
    }
  }
  if (j.contains("format")) {
    const auto& f = j["format"];
    if (!f.is_string() || (f != "csv" && f != "json"))
      error(c, ErrorCode::kBadConfig, "'format' must be \"csv\" or \"json\"");
    else
      cfg.format = f.get<std::string>();
  }
  if (j.contains("out")) {
    if (!j["out"].is_string())
      error(c, ErrorCode::kBadConfig, "'out' must be a string path");
    else
      cfg.out = j["out"].get<std::string>();
  }
  if (j.contains("threads")) {
    if (!j["threads"].is_number_unsigned())
      error(c, ErrorCode::kBadConfig, "'threads' must be a non-negative integer");
    else
      cfg.threads = j["threads"].get<int>();
  }
  if (c.errors.empty()) c.cfg = cfg;
  return c;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string to_string(const Diagnostic& d) {
  return (d.level == Diagnostic::Level::kWarning ? "warning: " : "error: ") + d.message;
}

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const auto& d : registry()) v.push_back({d.name, d.summary, d.defaults.dump()});
    return v;
  }();
  return infos;
}

ExperimentConfig parse_config(const std::string& text, std::vector<Diagnostic>* warnings,
                              std::optional<std::uint64_t> seed_override) {
  Checked c = check(text, seed_override);
  if (warnings) *warnings = c.warnings;
  if (!c.errors.empty()) fail(c.errors.front().code, c.errors.front().diag.message);
  return *c.cfg;
}

std::vector<Diagnostic> validate_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
  Checked c = check(text, seed_override);
  std::vector<Diagnostic> out;
  for (const auto& p : c.errors) out.push_back(p.diag);
  out.insert(out.end(), c.warnings.begin(), c.warnings.end());
  return out;
}

namespace {

Json user_params(const ExperimentConfig& cfg) {
  Json j;
  try {
    j = Json::parse(cfg.params_json.empty() ? "{}" : cfg.params_json);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kBadConfig, std::string("malformed params JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kBadConfig, "'params' must be an object");
  return j;
}

const ExperimentDef& require_def(const std::string& name) {
  const ExperimentDef* def = find(name);
  if (!def) fail(ErrorCode::kUnknownExperiment, "unknown experiment '" + name + "'");
  return *def;
}

}  // namespace

std::string config_hash(const ExperimentConfig& cfg) {
  const ExperimentDef& def = require_def(cfg.experiment);
  const Json canon{{"experiment", cfg.experiment}, {"params", merge_params(def, user_params(cfg), nullptr)},
                   {"seed", cfg.seed}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon.dump())));
  return buf;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  const ExperimentDef& def = require_def(cfg.experiment);
  detail::RunContext ctx{detail::Params(merge_params(def, user_params(cfg), nullptr)), Rng(cfg.seed),
                         resolve_threads(cfg.threads)};
  ResultTable t = def.run(ctx);
  // Standard keys first, then whatever the experiment recorded.
  auto extra = std::move(t.metadata);
  t.metadata.clear();
  t.set_meta("experiment", cfg.experiment);
  t.set_meta("seed", std::to_string(cfg.seed));
  t.set_meta("config_hash", config_hash(cfg));
  t.set_meta("artifact_version", kArtifactVersion);
  for (auto& [k, v] : extra) t.set_meta(k, v);
  return t;
}

std::string render(const ResultTable& table, const std::string& format) {
  if (format == "csv") return table.to_csv();
  if (format == "json") return table.to_json();
  fail(ErrorCode::kBadConfig, "unknown format '" + format + "'");
}

}  // namespace qmlab
