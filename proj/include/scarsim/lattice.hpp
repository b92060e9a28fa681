#pragma once

// Atom geometries, pairwise van der Waals couplings and the geometric
// predictors (optimal detuning, decay-rate predictors) derived from them.
//
// All lengths are in units of the nearest-neighbour spacing a; all
// frequencies are angular (rad/us) unless a name says otherwise.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scarsim/common.hpp"

namespace scarsim {

enum class LatticeKind {
  chain,
  zigzag_chain,
  square,
  honeycomb,
  lieb,
  decorated_honeycomb,
  edge_imbalanced_decorated_honeycomb,
};

std::string_view to_string(LatticeKind kind);
LatticeKind lattice_kind_from_string(std::string_view name);

enum class Sublattice : std::uint8_t { A = 0, B = 1 };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Size descriptor for build_lattice.
///
/// Chains use nx as the site count. Square and honeycomb patches are nx by ny
/// sites (honeycomb: ny zigzag rows of nx sites). Lieb and decorated lattices
/// count plaquettes / underlying honeycomb sites. If n_sites is set the patch
/// is cut down to the n_sites atoms closest to its centroid.
struct Extent {
  int nx = 1;
  int ny = 1;
  bool periodic = false;  // chains only
  std::optional<int> n_sites;
};

struct PhysicalParams {
  double omega = 0.0;  // Rabi frequency, rad/us
  double v0 = 0.0;     // nearest-neighbour interaction, rad/us

  static PhysicalParams from_mhz(double omega_mhz, double v0_mhz);
  void validate() const;
};

/// Distance tolerance used to classify coordination shells.
inline constexpr double kShellTolerance = 1e-6;

class Lattice {
 public:
  /// Validates the geometry: equal-length inputs, no coincident sites and a
  /// bipartite nearest-neighbour graph under the given labels.
  Lattice(LatticeKind kind, std::vector<Point> positions,
          std::vector<Sublattice> sublattice, bool periodic = false);

  LatticeKind kind() const { return kind_; }
  bool periodic() const { return periodic_; }
  int n_sites() const { return static_cast<int>(positions_.size()); }
  const std::vector<Point>& positions() const { return positions_; }
  const std::vector<Sublattice>& sublattice() const { return sublattice_; }
  const std::vector<int>& coordination() const { return coordination_; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }

  /// Pair distance in units of a. Periodic chains use the minimum image.
  double distance(int i, int j) const;

  bool is_nearest_neighbor(int i, int j) const;

  /// Radius of the shell after the nearest neighbours, if any pair lies
  /// beyond distance a.
  std::optional<double> nnn_distance() const { return nnn_distance_; }

  /// Bitmask of the nearest neighbours of site i. Requires n_sites <= 64.
  Bits neighbor_mask(int i) const;

  /// True for lattices whose two sublattices are related by a symmetry of
  /// the infinite lattice (chain, zigzag, square, honeycomb).
  bool sublattices_equivalent() const;

  /// Site farthest from the patch boundary (lowest index on ties). A site is
  /// on the boundary when its coordination is below the maximum found on its
  /// own sublattice. Restricted to one sublattice when `only` is given.
  int bulk_site(std::optional<Sublattice> only = std::nullopt) const;

  int count(Sublattice s) const;

  nlohmann::json to_json() const;
  static Lattice from_json(const nlohmann::json& j);

 private:
  LatticeKind kind_;
  bool periodic_;
  std::vector<Point> positions_;
  std::vector<Sublattice> sublattice_;
  std::vector<int> coordination_;
  std::vector<std::vector<int>> neighbors_;
  std::optional<double> nnn_distance_;
};

Lattice build_lattice(LatticeKind kind, const Extent& extent,
                      std::optional<double> zigzag_nnn_ratio = std::nullopt);

/// V_ij = V0 / (d_ij/a)^6 with zero diagonal.
Eigen::MatrixXd interaction_matrix(const Lattice& lat, const PhysicalParams& p);

/// Half the beyond-nearest-neighbour interaction sum seen by a bulk site;
/// averaged over the two sublattices' bulk sites when they are inequivalent.
double optimal_detuning(const Lattice& lat, const PhysicalParams& p);

struct BlockadeRadius {
  double rb_over_a;
  double a_over_rb;
};

BlockadeRadius blockade_radius(const PhysicalParams& p);

/// Reference decay-plane coefficients used to pick the faster-decaying
/// sublattice of inequivalent lattices.
inline constexpr double kReferenceAlpha = 0.72;
inline constexpr double kReferenceBeta = 0.58;
inline constexpr double kReferenceInvTau0 = 0.4;  // MHz

struct DecayPredictors {
  double x_mhz;  // (1/2pi) D Omega^2 / (4 V0)
  double y_mhz;  // (1/2pi) sum over next-nearest neighbours of V_ij
  int site;      // bulk site the sums were evaluated at
};

DecayPredictors decay_predictors(const Lattice& lat, const PhysicalParams& p);

/// tau = 1 / (alpha x + beta y + 1/tau0), x and y in MHz, tau in us.
double predict_lifetime(double x_mhz, double y_mhz, double alpha, double beta,
                        double tau0_us);

struct LifetimeOptimum {
  double v0;      // rad/us
  double tau_us;  // predicted lifetime at that V0
};

/// Interaction strength maximising the predicted lifetime at fixed Omega.
LifetimeOptimum optimal_lifetime(const Lattice& lat, double omega, double alpha,
                                 double beta, double tau0_us);

}  // namespace scarsim
