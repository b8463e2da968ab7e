// polcnot: command-line driver for the optical CNOT bench.
//
//   polcnot <subcommand> [scenario-file] [--seed N] [--out DIR] [--tolerance R]
//
// Subcommands: check, simulate, truth-table, calibrate, sweep, oracle.
// A missing scenario file or "-" reads standard input.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "polcnot/polcnot.hpp"

namespace {

struct Options {
  std::string file = "-";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tolerance;
  bool canonical = false;
};

std::optional<std::string> read_input(const std::string& file) {
  if (file == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), {});
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void print_diagnostics(const std::string& file, const polcnot::ParseResult& parsed) {
  for (const auto& d : parsed.diagnostics) {
    std::cerr << file << ':' << d.line << ':' << d.column << ": "
              << (d.severity == polcnot::Severity::error ? "error" : "warning") << ": "
              << d.message << '\n';
  }
}

int run(const std::string& subcommand, const Options& opt) {
  const auto text = read_input(opt.file);
  if (!text) {
    std::cerr << "polcnot: cannot read " << opt.file << '\n';
    return polcnot::kExitIo;
  }

  polcnot::ParseOptions parse_options;
  if (subcommand != "check") parse_options.kind = polcnot::parse_run_kind(subcommand);
  const polcnot::ParseResult parsed = polcnot::parse_scenario(*text, parse_options);
  if (!parsed.ok()) {
    print_diagnostics(opt.file, parsed);
    return polcnot::kExitInvalid;
  }
  polcnot::Scenario scenario = *parsed.scenario;
  if (opt.seed) scenario.mc.seed = *opt.seed;
  if (opt.out) scenario.output.dir = *opt.out;
  if (opt.tolerance) scenario.run.tolerance = *opt.tolerance;

  if (subcommand == "check") {
    if (opt.canonical) {
      std::cout << polcnot::serialize_scenario(scenario);
    } else {
      std::cout << opt.file << ": ok (run kind " << polcnot::run_kind_name(scenario.run.kind)
                << ")\n";
    }
    return polcnot::kExitOk;
  }

  const polcnot::RunReport report = polcnot::run_scenario(scenario);
  std::cout << report.summary;
  for (const auto& f : report.files) std::cout << "wrote " << f.string() << '\n';
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical CNOT gate bench: simulation, calibration and oracle checks"};
  app.require_subcommand(1);

  Options opt;
  std::string chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"check", "Parse and validate a scenario file"},
      {"simulate", "Propagate the configured beams through the cell"},
      {"truth-table", "Evaluate the four basis rows of the gate table"},
      {"calibrate", "Solve the two free cell parameters for CNOT operation"},
      {"sweep", "Recalibrate across temperatures and report drift"},
      {"oracle", "Compare the polarization formula with Monte Carlo sampling"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("scenario-file", opt.file, "Scenario file ('-' for stdin)");
    sub->add_option("--seed", opt.seed, "Override the scenario's Monte Carlo seed");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--tolerance", opt.tolerance, "Truth-table tolerance, rad")
        ->check(CLI::NonNegativeNumber);
    if (std::string(name) == "check") {
      sub->add_flag("--canonical", opt.canonical, "Print the canonical form of the scenario");
    }
    sub->callback([&chosen, name = std::string(name)] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : polcnot::kExitInvalid;
  }
  return run(chosen, opt);
}
