// sim - command-line driver for the two-qubit bath simulations.
//
//   sim <command> --config <path> [--out <dir>] [--seed N] [--solver oracle|blocks|vacuum]
//
// Exit status: 0 success, 1 usage or configuration error, 2 numerical failure.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tqb/app/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-qubit open-system simulator: evolution, scans, entanglement PDFs, repeater loops"};
  app.set_version_flag("--version", std::string("tqb ") + tqb::app::kVersion);

  std::string command, config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> solver;
  app.add_option("command", command, "evolve | purity-scan | concurrence-scan | pdf | repeater")
      ->required()
      ->check(CLI::IsMember(tqb::app::command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory (created if missing)");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--solver", solver, "overrides the config solver")
      ->check(CLI::IsMember({"oracle", "blocks", "vacuum"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    tqb::app::RunConfig cfg = tqb::app::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (solver) cfg.solver = tqb::solver_from_string(*solver);
    const auto result = tqb::app::run_command(command, cfg, out_dir);
    for (const auto& f : result.files) std::cout << "wrote " << f << '\n';
    std::cout << result.summary.dump() << '\n';
    return 0;
  } catch (const tqb::UsageError& e) {
    std::cerr << "sim: usage error: " << e.what() << '\n';
    return 1;
  } catch (const tqb::DomainError& e) {
    std::cerr << "sim: invalid parameters: " << e.what() << '\n';
    return 1;
  } catch (const tqb::Error& e) {
    std::cerr << "sim: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "sim: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sim: failure: " << e.what() << '\n';
    return 2;
  }
}
