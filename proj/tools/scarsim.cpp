// scarsim command-line front end.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "scarsim/commands.hpp"
#include "scarsim/config.hpp"
#include "scarsim/io.hpp"

using namespace scarsim;

namespace {

struct Source {
  std::string config;
  std::string preset;
};

void add_source(CLI::App* cmd, Source& s) {
  auto* c = cmd->add_option("--config", s.config, "JSON experiment config");
  auto* p = cmd->add_option("--preset", s.preset, "Shipping preset name");
  c->excludes(p);
}

ExperimentConfig load(const Source& s) {
  if (!s.config.empty()) return load_config(s.config);
  if (!s.preset.empty()) return preset(s.preset);
  throw ConfigError("one of --config or --preset is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg-array scar dynamics toolkit"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);

  std::string out = "out";
  int jobs = 0;
  Source src;

  auto* lattice = app.add_subcommand("lattice", "Build a lattice and report its geometry");
  auto* quench = app.add_subcommand("quench", "Run one quench");
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  auto* floquet = app.add_subcommand("floquet", "Compute a pulsed-model map");
  for (auto* cmd : {lattice, quench, sweep, floquet}) {
    add_source(cmd, src);
    cmd->add_option("--out", out, "Output directory")->capture_default_str();
  }
  for (auto* cmd : {sweep, floquet})
    cmd->add_option("--jobs", jobs, "Worker threads (0: all cores)")
        ->check(CLI::NonNegativeNumber);

  auto* analyze = app.add_subcommand("analyze", "Re-analyse a stored quench.csv");
  std::string input, mode = "fit";
  std::optional<double> omegam, omega_mhz;
  analyze->add_option("input", input, "quench.csv or a run directory")->required();
  analyze->add_option("--mode", mode, "fit or spectrum")->capture_default_str();
  analyze->add_option("--omegam", omegam, "Drive frequency in units of Omega");
  analyze->add_option("--omega-mhz", omega_mhz, "Rabi frequency nu_Omega in MHz");
  analyze->add_option("--out", out, "Output directory")->capture_default_str();

  auto* presets = app.add_subcommand("presets", "List presets or print one");
  std::string show;
  presets->add_option("--show", show, "Print the canonical JSON of a preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    nlohmann::json manifest;
    if (*lattice) {
      manifest = cmd_lattice(load(src), out);
      std::cout << read_json(out + "/lattice.json").dump(2) << "\n";
    } else if (*quench) {
      manifest = cmd_quench(load(src), out);
    } else if (*sweep) {
      manifest = cmd_sweep(load(src), out, jobs);
    } else if (*floquet) {
      manifest = cmd_floquet(load(src), out, jobs);
    } else if (*analyze) {
      AnalyzeOptions opt;
      opt.mode = analyze_mode_from_string(mode);
      opt.omegam_over_rabi = omegam;
      opt.omega_mhz = omega_mhz;
      manifest = cmd_analyze(input, opt, out);
    } else if (*presets) {
      if (!show.empty()) {
        std::cout << to_json(preset(show)).dump(2) << "\n";
      } else {
        for (const auto& name : preset_names()) {
          const auto c = preset(name);
          std::cout << name << (c.reference_only ? "  [reference-only]" : "") << "  "
                    << c.description << "\n";
        }
      }
      return 0;
    }
    std::cerr << manifest["command"].get<std::string>() << ": ok, "
              << manifest["outputs"].size() << " files in " << out << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }
}
