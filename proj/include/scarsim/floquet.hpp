#pragma once

// Pulsed drive: U_F(theta, tau) = exp(-i theta N) exp(-i tau H_PXP).
// Times are dimensionless, tau stands for Omega * tau.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scarsim/evolve.hpp"
#include "scarsim/hamiltonian.hpp"
#include "scarsim/hilbert.hpp"
#include "scarsim/lattice.hpp"

namespace scarsim {

/// Omega * tau_c, the PXP time that carries AF1 closest to AF2.
inline constexpr double kTauC = 0.755 * kTwoPi;

struct PulsedParams {
  double epsilon = 0.0;    // theta - pi
  double omega_tau = 0.0;  // Omega * tau
  int n_periods = 1;

  double theta() const { return kPi + epsilon; }
  static PulsedParams from_theta(double theta, double omega_tau,
                                 int n_periods = 1);
  void validate() const;
};

enum class Boundary { open, periodic };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view name);

/// Chain for the pulsed model. Periodic rings are limited to 18 sites and
/// open chains to 24.
Lattice pulsed_chain(int length, Boundary boundary);

/// PXP generator with Omega = 1.
HamiltonianParts unit_pxp(const Lattice& lat, const ConstrainedBasis& basis);

/// One drive period: free PXP evolution for tau, then the kick.
StateVector apply_period(const StateVector& psi, const PulsedParams& params,
                         const ConstrainedBasis& basis,
                         const HamiltonianParts& pxp, int krylov_dim = 24);

/// value(i, j) belongs to epsilons[i] and omega_taus[j].
struct FloquetMap {
  int length = 0;
  Boundary boundary = Boundary::periodic;
  int n_periods = 0;
  std::string initial_state;
  std::vector<double> epsilons;
  std::vector<double> omega_taus;
  Eigen::MatrixXd values;
};

/// Mean over n = 1..n_periods of |<psi0| U_F^(2n) |psi0>|^2.
FloquetMap revival_fidelity_map(int length, Boundary boundary,
                                const std::vector<double>& epsilons,
                                const std::vector<double>& omega_taus,
                                int n_periods,
                                const std::string& initial_state = "AF1",
                                int jobs = 1);

/// Stroboscopic imbalance I(n), n = 0..n_periods.
std::vector<double> stroboscopic_imbalance(const Lattice& lat,
                                           const ConstrainedBasis& basis,
                                           const HamiltonianParts& pxp,
                                           const PulsedParams& params,
                                           Bits initial);

/// Subharmonic weight of the stroboscopic imbalance: the series is treated
/// as sampled once per unit period, so the drive frequency is 2 pi and the
/// weight is read at pi.
FloquetMap pulsed_subharmonic_map(int length, Boundary boundary,
                                  const std::vector<double>& epsilons,
                                  const std::vector<double>& omega_taus,
                                  int n_periods = 400,
                                  const std::string& initial_state = "AF1",
                                  int jobs = 1);

/// |<AF2| exp(-i tau H_PXP) |AF1>|^2
double transfer_probability(const Lattice& lat, const ConstrainedBasis& basis,
                            const HamiltonianParts& pxp, double omega_tau);

/// Local maximum of transfer_probability in [lo, hi], by grid search and
/// golden-section refinement.
double optimal_transfer_time(const Lattice& lat, const ConstrainedBasis& basis,
                             const HamiltonianParts& pxp, double lo,
                             double hi);

/// Dense U_F for dim <= 1024.
Eigen::MatrixXcd floquet_unitary(const PulsedParams& params,
                                 const ConstrainedBasis& basis,
                                 const HamiltonianParts& pxp);

struct FloquetMode {
  cplx eigenvalue;
  StateVector vector;  // phase chosen so <AF1|v> is real and >= 0
  double overlap_af1 = 0.0;
  double overlap_af2 = 0.0;
  std::vector<double> class_probs;
};

struct FloquetEigenstateReport {
  /// The two eigenvectors with largest |<AF1|v>|^2 + |<AF2|v>|^2.
  std::array<FloquetMode, 2> modes;
  /// (v1 + v2)/sqrt 2 and (v1 - v2)/sqrt 2 with their class probabilities.
  StateVector symmetric;
  StateVector antisymmetric;
  std::vector<double> symmetric_probs;
  std::vector<double> antisymmetric_probs;
  /// All eigenvalues of U_F.
  Eigen::VectorXcd spectrum;
  /// Unit-modulus check: max | |lambda| - 1 |.
  double unitarity_error = 0.0;
};

FloquetEigenstateReport floquet_eigenstate_overlap(
    const PulsedParams& params, const Lattice& lat,
    const ConstrainedBasis& basis, const HamiltonianParts& pxp,
    const MicrostateOrdering& ordering);

/// Mean total-variation distance, over n = 0..n_periods, between the class
/// distribution of U_F^n |AF1> and that of its normalized projection onto
/// the two dominant modes. `captured` is the AF1 weight held by the modes.
struct TwoModeAgreement {
  double mean_tv_distance = 0.0;
  double captured = 0.0;
};

TwoModeAgreement two_mode_agreement(const FloquetEigenstateReport& report,
                                    const PulsedParams& params,
                                    const Lattice& lat,
                                    const ConstrainedBasis& basis,
                                    const HamiltonianParts& pxp,
                                    const MicrostateOrdering& ordering);

}  // namespace scarsim
