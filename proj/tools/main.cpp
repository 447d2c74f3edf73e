#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "telsim/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"telsim: N-level teleportation under noisy entanglement distribution"};

  std::string scenario_path;
  std::string out_path;
  bool quiet = false;
  double tol_override = -1.0;

  app.add_option("scenario", scenario_path, "path to a scenario file")->required();
  app.add_option("--out", out_path, "write machine-readable results to this path");
  app.add_flag("--quiet", quiet, "suppress the table output");
  app.add_option("--tol-override", tol_override,
                 "override runtime-check tolerances (testing only)");

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(scenario_path);
  if (!in) {
    std::cerr << "error: cannot open scenario file: " << scenario_path << "\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  const telsim::ParseResult parsed = telsim::parse_scenario(buffer.str());
  if (const auto* issues = std::get_if<std::vector<telsim::ParseIssue>>(&parsed)) {
    std::cerr << "scenario rejected:\n";
    for (const auto& issue : *issues) {
      std::cerr << "  " << issue.field << ": " << issue.message << "\n";
    }
    return 1;
  }

  telsim::RunOptions options;
  options.quiet = quiet;
  if (tol_override > 0.0) options.tol_override = tol_override;

  telsim::RunOutput output;
  try {
    output = telsim::run_scenario(std::get<telsim::Scenario>(parsed), options);
  } catch (const std::exception& e) {
    std::cerr << "error while running " << scenario_path << ": " << e.what() << "\n";
    return 2;
  }

  if (!quiet) std::cout << output.table_text;

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot open output file: " << out_path << "\n";
      return 1;
    }
    out << output.structured.dump(2) << "\n";
  }
  return output.exit_code;
}
