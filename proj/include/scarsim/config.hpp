#pragma once

// Experiment configuration: JSON in, validated structs out. Frequencies
// written as *_mhz are nu = w / 2pi.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scarsim/floquet.hpp"
#include "scarsim/hamiltonian.hpp"
#include "scarsim/lattice.hpp"

namespace scarsim {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

/// 2D patches above this size are outside the runnable envelope.
inline constexpr int kMaxRunnable2DSites = 24;

enum class Model { rydberg, pxp, sw2 };

std::string_view to_string(Model m);
Model model_from_string(std::string_view name);

/// Scale of a detuning or frequency entry. `opt` is Delta_q,opt of the
/// configured lattice and ignores the numeric value.
enum class Unit { omega, v0, mhz, opt };

std::string_view to_string(Unit u);
Unit unit_from_string(std::string_view name);

struct Quantity {
  double value = 0.0;
  Unit unit = Unit::omega;

  /// Angular value in rad/us.
  double resolve(const Lattice& lat, const PhysicalParams& p) const;
  friend bool operator==(const Quantity&, const Quantity&) = default;
};

struct LatticeSpec {
  LatticeKind kind = LatticeKind::chain;
  int nx = 9;
  int ny = 1;
  bool periodic = false;
  std::optional<int> n_sites;
  std::optional<double> zigzag_nnn_ratio;

  Lattice build() const;
  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// V0 is given directly or through a / R_b, where V(R_b) = Omega.
struct PhysicalSpec {
  double omega_mhz = 4.2;
  std::optional<double> v0_mhz;
  std::optional<double> a_over_rb;

  PhysicalParams resolve() const;
  friend bool operator==(const PhysicalSpec&, const PhysicalSpec&) = default;
};

struct DriveSpec {
  DriveShape shape = DriveShape::constant;
  Quantity delta0;
  Quantity deltam;
  Quantity omegam;
  /// Pulsed drives only: kick angle and dimensionless Omega * tau.
  double theta = kPi;
  double omega_tau = kTauC;
  int n_periods = 100;

  DriveProfile resolve(const Lattice& lat, const PhysicalParams& p) const;
  friend bool operator==(const DriveSpec&, const DriveSpec&) = default;
};

struct EvolutionSpec {
  double dt_us = 0.002;
  double total_time_us = 1.5;
  /// When set, the window is this many Rabi cycles (T = cycles / nu_Omega)
  /// and total_time_us is ignored.
  std::optional<double> total_rabi_cycles;
  int record_stride = 5;
  int krylov_dim = 16;
  bool enforce_drive_resolution = true;

  EvolutionConfig resolve(const PhysicalParams& p) const;
  friend bool operator==(const EvolutionSpec&, const EvolutionSpec&) = default;
};

struct ObservableSpec {
  bool microstates = false;
  std::vector<int> entropy_cuts;
  bool fit = true;
  bool spectrum = true;
  friend bool operator==(const ObservableSpec&, const ObservableSpec&) = default;
};

/// One sweep axis: `parameter` is a dotted path into the config JSON
/// ("physical.v0_mhz", "drive.omegam.value", "lattice", ...).
struct SweepAxis {
  std::string parameter;
  std::vector<nlohmann::json> values;
  friend bool operator==(const SweepAxis&, const SweepAxis&) = default;
};

/// decay_alpha and decay_beta fit 1/tau against one predictor (x or y).
enum class Aggregate { none, decay_plane, decay_alpha, decay_beta, rigidity };

std::string_view to_string(Aggregate a);
Aggregate aggregate_from_string(std::string_view name);

/// Cartesian grid over the axes, first axis slowest.
struct SweepSpec {
  std::vector<SweepAxis> axes;
  Aggregate aggregate = Aggregate::none;

  std::size_t size() const;
  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

enum class FloquetMapKind { revival, subharmonic };

std::string_view to_string(FloquetMapKind k);
FloquetMapKind floquet_map_from_string(std::string_view name);

struct FloquetSpec {
  FloquetMapKind map = FloquetMapKind::revival;
  int length = 14;
  Boundary boundary = Boundary::periodic;
  std::vector<double> epsilons;
  std::vector<double> omega_taus;
  int n_periods = 100;
  std::string initial_state = "AF1";
  friend bool operator==(const FloquetSpec&, const FloquetSpec&) = default;
};

struct ExperimentConfig {
  std::string name = "custom";
  std::string description;
  bool reference_only = false;
  LatticeSpec lattice;
  PhysicalSpec physical;
  Model model = Model::rydberg;
  std::optional<double> cutoff;
  DriveSpec drive;
  std::string initial_state = "AF1";
  EvolutionSpec evolution;
  ObservableSpec observables;
  std::optional<SweepSpec> sweep;
  std::optional<FloquetSpec> floquet;

  /// Cross-field checks; throws ConfigError naming the offending field.
  void validate() const;
  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

/// Canonical JSON: every field present, quantities in object form.
nlohmann::json to_json(const ExperimentConfig& c);
/// Strict parse: unknown keys and wrong types are ConfigErrors carrying the
/// field path. Missing keys take their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Parses text; syntax errors report line and column.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64 of the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& c);
std::string hash_hex(std::uint64_t h);

/// Copy of `base` with the dotted `path` replaced by `value`, re-parsed.
ExperimentConfig with_parameter(const ExperimentConfig& base,
                                const std::string& path,
                                const nlohmann::json& value);

/// Shipping presets.
std::vector<std::string> preset_names();
ExperimentConfig preset(std::string_view name);

}  // namespace scarsim
