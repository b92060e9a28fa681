#pragma once

// CLI subcommands. Each writes its files into `out` (created if needed)
// plus manifest.json, and returns the manifest. Errors propagate after the
// manifest has been written with the failure status.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "scarsim/config.hpp"

namespace scarsim {

nlohmann::json cmd_lattice(const ExperimentConfig& c,
                           const std::filesystem::path& out);
nlohmann::json cmd_quench(const ExperimentConfig& c,
                          const std::filesystem::path& out);
nlohmann::json cmd_sweep(const ExperimentConfig& c,
                         const std::filesystem::path& out, int jobs);
nlohmann::json cmd_floquet(const ExperimentConfig& c,
                           const std::filesystem::path& out, int jobs);

enum class AnalyzeMode { fit, spectrum };
AnalyzeMode analyze_mode_from_string(std::string_view name);

struct AnalyzeOptions {
  AnalyzeMode mode = AnalyzeMode::fit;
  /// Drive frequency in units of Omega; adds the calibrated half-frequency
  /// column and the subharmonic weight.
  std::optional<double> omegam_over_rabi;
  /// Rabi frequency nu_Omega. Taken from summary.json next to the input
  /// when omitted.
  std::optional<double> omega_mhz;
};

/// Re-analyses a stored quench.csv (or a directory holding one). Writes
/// fit.json, or spectrum.csv and analysis.json, into `out`.
nlohmann::json cmd_analyze(const std::filesystem::path& input,
                           const AnalyzeOptions& opt,
                           const std::filesystem::path& out);

/// Exit status for an exception: 2 config, 3 capacity, 4 numerical, 1 other.
int exit_code(const std::exception& e);

}  // namespace scarsim
