// nfpe: run, validate and compare solver configurations.
//
// Exit status: 0 success, 1 task or hard-invariant failure, 2 usage error.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "nfpe/errors.hpp"
#include "nfpe/runner.hpp"

namespace {

nfpe::RunOptions options(bool sequential) {
  nfpe::RunOptions opts;
  opts.sequential = sequential;
  if (const char* root = std::getenv("NFPE_OUTPUT_ROOT"); root != nullptr && *root != '\0')
    opts.output_root = root;
  return opts;
}

void report(const nfpe::RunOutcome& out) {
  std::cout << "manifest: " << out.manifest_path.string() << "\n";
  if (out.manifest.contains("tasks")) {
    for (const auto& [name, entry] : out.manifest.at("tasks").items()) {
      std::cout << name << ": " << entry.at("status").get<std::string>();
      if (entry.contains("error")) std::cout << " (" << entry.at("error").get<std::string>() << ")";
      for (const auto& f : entry.value("hard_invariant_failures", nlohmann::json::array()))
        std::cout << " [" << f.get<std::string>() << "]";
      std::cout << "\n";
    }
  }
  if (out.manifest.contains("validation"))
    std::cout << "validation: " << (out.manifest["validation"]["passed"].get<bool>() ? "passed" : "violations")
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Fokker-Planck solver"};
  app.require_subcommand(1);
  bool sequential = false;
  app.add_flag("--sequential", sequential, "Single-threaded deterministic mode");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the tasks of a config");
  run_cmd->add_option("config", config_path, "Config JSON")->required();

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check model hypotheses for a config");
  validate_cmd->add_option("config", validate_path, "Config JSON")->required();

  std::string manifest_a, manifest_b;
  bool diff_json = false;
  auto* diff_cmd = app.add_subcommand("diff", "Compare two run manifests");
  diff_cmd->add_option("manifest_a", manifest_a, "First manifest")->required();
  diff_cmd->add_option("manifest_b", manifest_b, "Second manifest")->required();
  diff_cmd->add_flag("--json", diff_json, "Print the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      const auto cfg = nfpe::load_run_config(config_path);
      const auto out = nfpe::run(cfg, options(sequential));
      report(out);
      return out.exit_code;
    }
    if (*validate_cmd) {
      const auto cfg = nfpe::load_run_config(validate_path);
      const auto out = nfpe::validate_only(cfg, options(sequential));
      report(out);
      return out.exit_code;
    }
    if (*diff_cmd) {
      const auto rep = nfpe::diff_runs(manifest_a, manifest_b);
      std::cout << (diff_json ? rep.dump(2) + "\n" : nfpe::format_diff(rep));
      return 0;
    }
  } catch (const nfpe::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
