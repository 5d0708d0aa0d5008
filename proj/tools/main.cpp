#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "powerutil/cli.hpp"
#include "powerutil/error.hpp"

namespace {

bool write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return static_cast<bool>(std::cout);
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace powerutil;
  CLI::App app{"Optimal power-utility portfolios for models with conditionally independent increments"};
  std::string config_path;
  cli::Overrides overrides;
  bool quiet = false;
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--command", overrides.command, "solve, value, explode, simulate or verify");
  app.add_option("--seed", overrides.seed, "simulation seed");
  app.add_option("--out", overrides.out, "output file (default: standard output)");
  app.add_option("--format", overrides.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", overrides.workers, "simulation threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "print nothing on standard output");
  CLI11_PARSE(app, argc, argv);

  cli::RunOutput result;
  cli::RunConfig cfg;
  bool loaded = false;
  try {
    cfg = cli::load_config(config_path, overrides);
    loaded = true;
  } catch (const Error& e) {
    result = cli::failed_run(overrides.command.value_or("unknown"), to_string(e.code()), e.what());
  }
  if (loaded) result = cli::run(cfg);

  const std::string out_path = loaded ? cfg.output.path : overrides.out.value_or("");
  const bool csv = loaded && cfg.output.format == cli::Format::csv;
  for (const auto& e : result.report["errors"]) {
    std::cerr << "error " << e["code"].get<std::string>() << ": "
              << e["message"].get<std::string>() << "\n";
  }
  for (const auto& w : result.report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";

  std::string text;
  if (csv && !result.csv.empty()) {
    text = result.csv;
  } else {
    text = cli::render(result.report);
  }
  if (!(quiet && out_path.empty())) {
    if (!write_text(out_path, text)) {
      std::cerr << "error: cannot write output\n";
      return 2;
    }
  }
  return result.exit_status;
}
