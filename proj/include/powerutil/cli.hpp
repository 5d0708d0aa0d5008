#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "powerutil/mc_oracle.hpp"

namespace powerutil::cli {

enum class Command { solve, value, explode, simulate, verify };
enum class Format { json, csv };

std::string to_string(Command c);
std::optional<Command> parse_command(const std::string& name);

struct OutputSpec {
  std::string path;  ///< empty: standard output
  Format format = Format::json;
};

struct RunConfig {
  Command command = Command::solve;
  FactorModelSpec model;
  std::optional<SimConfig> sim;
  OutputSpec output;
  std::optional<double> pi;  ///< constant strategy for simulate; optimal otherwise
  double grid_resolution = 1e-6;
  double grid_window = 50.0;
  /// Every key that was read, with defaults filled in. Worker counts are left
  /// out so that reports do not depend on them.
  nlohmann::json resolved = nlohmann::json::object();
};

/// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::string> command;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> workers;
};

/// Parses INI text with sections [model], [preferences], [simulation] and
/// [output]; `command` may sit at the top. Throws Error(config_error) naming
/// the offending key.
RunConfig parse_config(const std::string& text, const Overrides& overrides = {});
RunConfig load_config(const std::string& path, const Overrides& overrides = {});

struct RunOutput {
  nlohmann::json report;
  std::string csv;  ///< path table when one applies
  int exit_status = 0;
};

/// Executes the command. Never throws for domain failures: they become error
/// records {code, message} in the report and a nonzero exit status.
RunOutput run(const RunConfig& config);

/// Report for a configuration that failed to load.
RunOutput failed_run(const std::string& command, const std::string& code,
                     const std::string& message);

/// Problems found when checking a report against the schema; empty if valid.
std::vector<std::string> validate_report(const nlohmann::json& report);

/// Two-space indented JSON with a trailing newline.
std::string render(const nlohmann::json& report);

/// Path table with the header time,y,pi,S,V,alpha.
std::string path_csv(const SimulatedPath& path);

}  // namespace powerutil::cli
