// Command-line front end: solve, export and check problem files.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "optctl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"optctl: direct-transcription optimal control"};
  app.require_subcommand(1);

  std::string file;
  std::optional<std::size_t> N;
  std::optional<std::string> scheme;
  std::string out_dir = ".";

  auto add_common = [&](CLI::App* cmd, bool writes) {
    cmd->add_option("file", file, "problem file")->required();
    cmd->add_option("--N", N, "number of grid intervals (overrides the file)");
    cmd->add_option("--scheme", scheme, "forward_euler | backward_euler | trapezoidal");
    if (writes) cmd->add_option("--out-dir", out_dir, "directory for output files");
  };
  auto* solve = app.add_subcommand("solve", "transcribe and solve; writes <stem>.traj.csv and <stem>.sol.json");
  auto* exp = app.add_subcommand("export", "write the transcribed program to <stem>.nlp.txt");
  auto* check = app.add_subcommand("check", "validate and classify a problem file");
  add_common(solve, true);
  add_common(exp, true);
  add_common(check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : optctl::cli::kExitInputError;
  }

  const optctl::cli::Overrides overrides{N, scheme};
  if (*solve) return optctl::cli::run_solve(file, overrides, out_dir, std::cout, std::cerr);
  if (*exp) return optctl::cli::run_export(file, overrides, out_dir, std::cout, std::cerr);
  return optctl::cli::run_check(file, overrides, std::cout, std::cerr);
}
