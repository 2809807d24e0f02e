#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rmspace/scenario.hpp"

namespace {

int read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "rmspace: cannot open '" << path << "'\n";
    return 2;
  }
  std::ostringstream os;
  os << in.rdbuf();
  out = os.str();
  return 0;
}

std::optional<rmspace::Scenario> load(const std::string& path) {
  std::string text;
  if (read_file(path, text) != 0) return std::nullopt;
  try {
    return rmspace::parse_scenario(text);
  } catch (const rmspace::ScenarioError& e) {
    std::cerr << "rmspace: " << path << ": " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random metric space toolkit"};
  app.require_subcommand(1);

  std::string file;
  std::string format = "json";
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  std::string set_name;

  CLI::App* run = app.add_subcommand("run", "execute a scenario's task");
  run->add_option("file", file, "scenario file")->required();
  run->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  run->add_option("--tol", tol, "override the stopping tolerance");
  run->add_option("--max-iter", max_iter, "override the iteration budget");
  run->add_option("--seed", seed, "override the sampling seed");

  CLI::App* verify = app.add_subcommand("verify", "run the axiom and certificate checks");
  verify->add_option("file", file, "scenario file")->required();
  verify->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
  verify->add_option("--seed", seed, "override the sampling seed");

  CLI::App* hull = app.add_subcommand("hull", "materialize a named set's hull");
  hull->add_option("file", file, "scenario file")->required();
  hull->add_option("--set", set_name, "set object name")->required();
  hull->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::stringstream null_out;
    const int code = app.exit(e, null_out, null_out);
    std::cerr << null_out.str();
    return code == 0 ? 0 : 2;
  }

  auto scenario = load(file);
  if (!scenario) return 2;

  const rmspace::ReportFormat fmt =
      format == "text" ? rmspace::ReportFormat::Text : rmspace::ReportFormat::Json;

  rmspace::Report report;
  if (hull->parsed()) {
    report = rmspace::hull_report(*scenario, set_name);
    if (report.status == "error") {
      std::cerr << "rmspace: " << report.body["error"].get<std::string>() << "\n";
      return 2;
    }
  } else {
    if (verify->parsed() && scenario->task.kind != rmspace::TaskKind::Verify) {
      rmspace::Task t;  // force the verify task, keeping the scenario's seed
      t.seed = scenario->task.seed;
      scenario->task = t;
    }
    rmspace::RunOverrides overrides;
    overrides.tol = tol;
    overrides.max_iter = max_iter;
    overrides.seed = seed;
    report = rmspace::run_scenario(*scenario, overrides);
  }

  std::cout << rmspace::emit_report(report, fmt);
  return report.exit_code();
}
