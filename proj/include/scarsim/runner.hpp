#pragma once

// Turns an ExperimentConfig into simulations and analysis results. File
// output lives in commands.hpp.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scarsim/analysis.hpp"
#include "scarsim/config.hpp"
#include "scarsim/evolve.hpp"
#include "scarsim/floquet.hpp"

namespace scarsim {

/// Throws CapacityError for reference-only configs and for 2D patches above
/// kMaxRunnable2DSites.
void check_runnable(const ExperimentConfig& c);

struct PreparedRun {
  Lattice lattice;
  PhysicalParams params;
  ConstrainedBasis basis;
  HamiltonianParts parts;
  DriveProfile drive;
  Bits initial = 0;
  EvolutionConfig evolution;
  std::optional<MicrostateOrdering> ordering;
};

PreparedRun prepare_run(const ExperimentConfig& c);

struct QuenchReport {
  double rabi = 0.0;  // rad/us
  QuenchResult result;
  std::optional<DampedCosineFit> fit;
  std::string fit_error;
  std::optional<Spectrum> spectrum;
  std::optional<double> omegam;  // rad/us, periodic drives only
  std::optional<double> subharmonic_weight;
  std::optional<double> dominant_peak;  // rad/us
  std::optional<DecayPredictors> predictors;
  /// (1/T) int S dt per entropy cut.
  std::vector<double> mean_entropy;
  std::optional<MicrostateOrdering> ordering;
};

/// Runs one quench. Pulsed drives are evolved period by period and
/// recorded stroboscopically; their spectrum uses the period index as time.
QuenchReport run_config(const ExperimentConfig& c);

/// Geometry summary: site count, Delta_q,opt, decay predictors, a / R_b.
nlohmann::json lattice_report(const ExperimentConfig& c);

struct SweepPoint {
  std::size_t index = 0;
  std::vector<nlohmann::json> values;  // one per axis
  /// "ok", "config", "capacity", "numerical" or "error".
  std::string status = "ok";
  std::string error;
  std::optional<QuenchReport> report;
};

struct RigidityRow {
  std::vector<nlohmann::json> group;  // values of the non-omega_m axes
  double rigidity = 0.0;
  std::string error;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  std::optional<PlaneFit> plane;
  std::optional<LineFit> line;
  std::vector<RigidityRow> rigidity;
  std::string aggregate_error;
};

/// Runs every grid point (in parallel, `jobs` workers) and aggregates in
/// grid order. Per-point failures are recorded, not thrown.
SweepReport run_sweep(const ExperimentConfig& c, int jobs);

/// Status label of an exception, as used in SweepPoint::status.
std::string error_status(const std::exception& e);

FloquetMap run_floquet(const ExperimentConfig& c, int jobs);

}  // namespace scarsim
