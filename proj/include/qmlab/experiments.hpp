#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmlab/table.hpp"

namespace qmlab {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct Diagnostic {
  enum class Level { kWarning, kError };
  Level level = Level::kError;
  std::string message;
};

std::string to_string(const Diagnostic& d);  // "warning: ..." / "error: ..."

// JSON config:
//   {"experiment": "<name>", "seed": <uint>, "params": {...},
//    "format": "csv"|"json", "out": "<path>", "threads": <int>}
// `params` keys not declared by the experiment are warnings; the rest must
// match the type of the declared default.
struct ExperimentConfig {
  std::string experiment;
  std::string params_json = "{}";  // user params only, defaults merged at run time
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string out;
  int threads = 0;
};

struct ExperimentInfo {
  std::string name;
  std::string summary;
  std::string defaults_json;
};

const std::vector<ExperimentInfo>& list_experiments();

// Throws kBadConfig (malformed JSON, missing seed, bad types or values) or
// kUnknownExperiment. Warnings go to `warnings` when given. A seed override
// replaces the config seed and satisfies its requirement.
ExperimentConfig parse_config(const std::string& text, std::vector<Diagnostic>* warnings = nullptr,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

// Every problem parse_config would raise, as diagnostics, plus warnings. An
// empty result means the config is valid.
std::vector<Diagnostic> validate_config(const std::string& text,
                                        std::optional<std::uint64_t> seed_override = std::nullopt);

// 16 hex digits of FNV-1a 64 over the canonical experiment, seed and merged params.
std::string config_hash(const ExperimentConfig& cfg);

// Runs the experiment and stamps metadata (experiment, seed, config hash,
// artifact version). Throws kUnknownExperiment or kBadConfig for config
// problems; other errors mean the experiment itself failed.
ResultTable run_experiment(const ExperimentConfig& cfg);

std::string render(const ResultTable& table, const std::string& format);

}  // namespace qmlab
