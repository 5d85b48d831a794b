// onearm command line: lattice second-moment laboratory.
//
// Subcommands map one-to-one onto experiment kinds; each takes an optional
// config file plus key=value overrides.  Exit codes: 0 pass, 1 check failure,
// 2 usage error, 3 budget error.

#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "onearm/errors.hpp"
#include "onearm/harness.hpp"
#include "onearm/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lattice one-arm / second-moment laboratory"};
  app.set_version_flag("--version", onearm::kVersion);
  app.require_subcommand(1);

  struct SubSpec {
    const char* name;
    const char* kind;
    const char* help;
  };
  const std::vector<SubSpec> subs = {
      {"verify", "verify-exact", "exact identity and inequality suites"},
      {"ising", "ising-arm", "spin chains: one-arm (default) or two-point runs"},
      {"worm", "worm", "current sampling with prescribed sources"},
      {"perc", "percolation", "bond percolation estimates and checks"},
      {"scaling", "scaling", "power-law shell sums and slope fits"},
      {"fit", "fit", "log-log fits over a results file"},
      {"report", "report", "summarize results files into a report directory"},
  };

  struct Parsed {
    std::string config_path;
    std::vector<std::string> overrides;
    const SubSpec* spec = nullptr;
  } parsed;

  for (const auto& spec : subs) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    auto path = std::make_shared<std::string>();
    auto overrides = std::make_shared<std::vector<std::string>>();
    sub->add_option("config", *path, "config file (key = value lines)");
    sub->add_option("overrides", *overrides, "key=value overrides");
    sub->callback([&parsed, &spec, path, overrides]() {
      parsed.spec = &spec;
      parsed.config_path = *path;
      parsed.overrides = *overrides;
      // a bare key=value in the config slot is an override, not a path
      if (parsed.config_path.find('=') != std::string::npos) {
        parsed.overrides.insert(parsed.overrides.begin(), parsed.config_path);
        parsed.config_path.clear();
      }
    });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    onearm::ExperimentConfig cfg =
        parsed.config_path.empty()
            ? onearm::ExperimentConfig::from_overrides(parsed.overrides)
            : onearm::ExperimentConfig::from_file(parsed.config_path, parsed.overrides);
    cfg.kv["kind"] = parsed.spec->kind;
    // `ising` doubles for two-point runs via mode=twopoint
    if (std::string(parsed.spec->name) == "ising" &&
        cfg.str("mode", "arm") == "twopoint")
      cfg.kv["kind"] = "ising-twopoint";

    onearm::RunOutcome outcome = onearm::run_experiment(cfg, std::cout);
    return outcome.pass ? 0 : 1;
  } catch (const onearm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const onearm::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
