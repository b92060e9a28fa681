#pragma once

// Krylov time evolution, reduced density matrices and a dense reference
// propagator.

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "scarsim/common.hpp"
#include "scarsim/hamiltonian.hpp"
#include "scarsim/hilbert.hpp"
#include "scarsim/lattice.hpp"
#include "scarsim/quench_result.hpp"

namespace scarsim {

using StateVector = Eigen::VectorXcd;

/// |s> as a state vector over `basis`.
StateVector basis_vector(const ConstrainedBasis& basis, Bits s);

/// Normalized random state with Gaussian amplitudes.
StateVector random_state(std::size_t dim, unsigned seed);

/// y = H x for some hermitian H, both of length dim.
using HermitianApply = std::function<void(const cplx* x, cplx* y)>;

/// exp(-i H t) v by Lanczos with full reorthogonalization. The step is
/// split adaptively until the a-posteriori error estimate stays below
/// `tol` times the norm of v. An invariant subspace found before
/// krylov_dim vectors ends the expansion early.
StateVector krylov_expm(const HermitianApply& apply, const StateVector& v,
                        double t, int krylov_dim = 16, double tol = 1e-13);

/// exp(-i H(t + dt/2) dt) psi, renormalized. dt may be negative.
StateVector propagate_step(const HamiltonianParts& parts,
                           const DriveProfile& drive, const StateVector& psi,
                           double t, double dt, int krylov_dim = 16);

struct EvolutionConfig {
  double dt = 0.002;  // us
  int krylov_dim = 16;
  int record_stride = 1;
  double total_time = 1.0;  // us
  /// Split each step so periodic drives get at least 200 samples a period.
  bool enforce_drive_resolution = true;

  void validate() const;
  /// Number of dt steps, total_time / dt rounded to the nearest integer.
  long n_steps() const;
};

struct ObservableRequest {
  bool microstates = false;
  std::vector<int> entropy_cuts;
};

/// Appends the observables of successive snapshots to a QuenchResult.
class QuenchRecorder {
 public:
  /// `ordering` is required when microstates are requested; entropy cuts
  /// must lie in [1, n_sites - 1].
  QuenchRecorder(const Lattice& lat, const ConstrainedBasis& basis,
                 const ObservableRequest& obs,
                 const MicrostateOrdering* ordering = nullptr);

  void record(double t, const StateVector& psi);
  /// Moves the result out, with `final_state` set to the last snapshot.
  QuenchResult take();

 private:
  const Lattice& lat_;
  const ConstrainedBasis& basis_;
  ObservableRequest obs_;
  const MicrostateOrdering* ordering_;
  QuenchResult r_;
};

/// Evolves psi0 and records observables at t = k * dt * record_stride.
/// `ordering` is required when microstates are requested.
QuenchResult run_quench(const Lattice& lat, const ConstrainedBasis& basis,
                        const HamiltonianParts& parts, const DriveProfile& drive,
                        const StateVector& psi0, const EvolutionConfig& cfg,
                        const ObservableRequest& obs = {},
                        const MicrostateOrdering* ordering = nullptr);

/// <n_i> for every site.
std::vector<double> site_populations(const ConstrainedBasis& basis,
                                     const StateVector& psi);

/// <psi| H(delta) |psi>, real part.
double energy(const HamiltonianParts& parts, double delta,
              const StateVector& psi);

/// Reduced density matrix over the subset configurations that occur in the
/// basis. configs[a] has bit j set when subset site sites[j] is excited.
struct ReducedDensityMatrix {
  std::vector<int> sites;
  std::vector<Bits> configs;
  Eigen::MatrixXcd rho;

  /// Embedding into the full 2^|sites| product space.
  Eigen::MatrixXcd full() const;
};

ReducedDensityMatrix reduced_density_matrix(const StateVector& psi,
                                            const ConstrainedBasis& basis,
                                            const std::vector<int>& subset);

/// Von Neumann entropy in nats. Eigenvalues below 1e-14 are dropped;
/// eigenvalues below -1e-10 raise NumericalError.
double entanglement_entropy(const Eigen::MatrixXcd& rho);

/// Entropy of the first `cut` sites.
double cut_entropy(const StateVector& psi, const ConstrainedBasis& basis,
                   int cut);

inline constexpr std::size_t kDenseMaxDim = 1024;

/// exp(-i H(delta) t) from a full eigendecomposition; dim <= 1024.
Eigen::MatrixXcd dense_propagator(const HamiltonianParts& parts, double delta,
                                  double t);

}  // namespace scarsim
