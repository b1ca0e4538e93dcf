// qmlab: run, list and validate experiment configs.
//
//   qmlab list
//   qmlab validate --config cfg.json
//   qmlab run --config cfg.json [--seed N] [--out path] [--format csv|json] [--threads N]
//
// Exit codes: 0 success, 1 experiment failure, 2 config error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qmlab/error.hpp"
#include "qmlab/experiments.hpp"
#include "qmlab/io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kExperimentFailure = 1;
constexpr int kConfigError = 2;

bool is_config_error(qmlab::ErrorCode c) {
  return c == qmlab::ErrorCode::kBadConfig || c == qmlab::ErrorCode::kUnknownExperiment;
}

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

// Config file text; a missing or unreadable file is a config error.
std::optional<std::string> load_config(const std::string& path) {
  try {
    return qmlab::read_text_file(path);
  } catch (const qmlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

int cmd_list(bool json) {
  const auto& infos = qmlab::list_experiments();
  if (json) {
    std::cout << "[\n";
    for (std::size_t i = 0; i < infos.size(); ++i)
      std::cout << "  {\"name\": \"" << infos[i].name << "\", \"defaults\": " << infos[i].defaults_json << "}"
                << (i + 1 < infos.size() ? "," : "") << "\n";
    std::cout << "]\n";
    return kOk;
  }
  std::size_t width = 0;
  for (const auto& i : infos) width = std::max(width, i.name.size());
  for (const auto& i : infos) std::cout << i.name << std::string(width + 2 - i.name.size(), ' ') << i.summary << "\n";
  return kOk;
}

int cmd_validate(const std::string& path, std::optional<std::uint64_t> seed) {
  const auto text = load_config(path);
  if (!text) return kConfigError;
  bool errors = false;
  for (const auto& d : qmlab::validate_config(*text, seed)) {
    std::cout << qmlab::to_string(d) << "\n";
    errors |= d.level == qmlab::Diagnostic::Level::kError;
  }
  return errors ? kConfigError : kOk;
}

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> threads;
};

int cmd_run(const RunFlags& f) {
  const auto text = load_config(f.config);
  if (!text) return kConfigError;
  qmlab::ExperimentConfig cfg;
  try {
    std::vector<qmlab::Diagnostic> warnings;
    cfg = qmlab::parse_config(*text, &warnings, f.seed);
    for (const auto& w : warnings) std::cerr << qmlab::to_string(w) << "\n";
  } catch (const qmlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  if (f.format) cfg.format = *f.format;
  if (f.out) cfg.out = *f.out;
  if (f.threads) {
    cfg.threads = *f.threads;
  } else if (const auto t = env("QMLAB_THREADS")) {
    try {
      cfg.threads = std::stoi(*t);
    } catch (const std::exception&) {
      std::cerr << "error: QMLAB_THREADS must be an integer\n";
      return kConfigError;
    }
  }
  if (const auto dir = env("QMLAB_OUT_DIR")) {
    namespace fs = std::filesystem;
    const fs::path name = cfg.out.empty() ? fs::path(cfg.experiment + "." + cfg.format) : fs::path(cfg.out);
    cfg.out = name.is_absolute() ? name.string() : (fs::path(*dir) / name).string();
  }

  std::string rendered;
  try {
    rendered = qmlab::render(qmlab::run_experiment(cfg), cfg.format);
  } catch (const qmlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.code()) ? kConfigError : kExperimentFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: experiment failed: " << e.what() << "\n";
    return kExperimentFailure;
  }
  if (cfg.out.empty()) {
    std::cout << rendered;
    return kOk;
  }
  std::error_code ec;
  const auto parent = std::filesystem::path(cfg.out).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  try {
    qmlab::write_text_file(cfg.out, rendered);
  } catch (const qmlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExperimentFailure;
  }
  std::cerr << "wrote " << cfg.out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmlab experiment runner"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "List experiments");
  bool list_json = false;
  list->add_flag("--json", list_json, "Print the catalog with default parameters as JSON");

  RunFlags rf;
  std::uint64_t seed = 0;
  std::string out, format;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run the experiment named in a config file");
  run->add_option("--config", rf.config, "JSON config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
  auto* out_opt = run->add_option("--out", out, "Output file (stdout when absent)");
  auto* fmt_opt = run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  auto* thr_opt = run->add_option("--threads", threads, "Worker thread cap (0 = QMLAB_THREADS or 1)")
                      ->check(CLI::NonNegativeNumber);

  std::string vconfig;
  std::uint64_t vseed = 0;
  auto* validate = app.add_subcommand("validate", "Check a config file and print diagnostics");
  validate->add_option("--config", vconfig, "JSON config file")->required();
  auto* vseed_opt = validate->add_option("--seed", vseed, "Seed override to assume");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (*list) return cmd_list(list_json);
  if (*validate) return cmd_validate(vconfig, *vseed_opt ? std::optional(vseed) : std::nullopt);
  if (*seed_opt) rf.seed = seed;
  if (*out_opt) rf.out = out;
  if (*fmt_opt) rf.format = format;
  if (*thr_opt) rf.threads = threads;
  return cmd_run(rf);
}
