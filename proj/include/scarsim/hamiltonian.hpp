#pragma once

// Sparse operators in the constrained basis and the detuning drives that
// multiply the particle-number term.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scarsim/common.hpp"
#include "scarsim/hilbert.hpp"
#include "scarsim/lattice.hpp"

namespace scarsim {

struct Triplet {
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Compressed-row sparse matrix.
class SparseOperator {
 public:
  SparseOperator() = default;

  /// Builds a hermitian operator from its diagonal and strictly-upper
  /// entries; each upper entry (r, c, v) is mirrored as (c, r, conj v), so
  /// the stored matrix equals its adjoint bit for bit.
  static SparseOperator hermitian_from_upper(std::size_t dim,
                                             std::span<const Triplet> upper);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  /// out = A * in
  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  /// out += scale * A * in
  void apply_add(std::span<const cplx> in, std::span<cplx> out,
                 cplx scale = 1.0) const;

  std::vector<Triplet> triplets() const;
  Eigen::MatrixXcd to_dense() const;

  /// Maximum absolute row sum, an upper bound on the spectral radius.
  double row_sum_norm() const;

  /// One "row col re im" line per stored entry, 17 significant digits.
  void write_triplets(std::ostream& os) const;

 private:
  std::size_t dim_ = 0;
  bool hermitian_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<cplx> values_;
};

enum class DriveShape { constant, cosine, square, pulsed };

std::string_view to_string(DriveShape shape);
DriveShape drive_shape_from_string(std::string_view name);

struct DriveProfile {
  DriveShape shape = DriveShape::constant;
  double delta0 = 0.0;  // rad/us
  double deltam = 0.0;  // rad/us
  double omegam = 0.0;  // rad/us
  double theta = 0.0;   // pulsed kick angle, rad
  double tau = 0.0;     // pulsed period, us

  static DriveProfile constant(double delta);
  static DriveProfile cosine(double delta0, double deltam, double omegam);
  static DriveProfile square(double delta0, double deltam, double omegam);
  static DriveProfile pulsed(double theta, double tau);

  bool periodic() const {
    return shape == DriveShape::cosine || shape == DriveShape::square;
  }
  double period() const;
  void validate() const;
};

/// Detuning at time t. Square drives use Theta(0) = 1. Throws for pulsed
/// drives, which have no continuous detuning.
double detuning_at(const DriveProfile& drive, double t);

/// H(t) = flip + diag(diag_static) - Delta(t) diag(diag_number) [+ sw2_extra]
struct HamiltonianParts {
  SparseOperator flip;
  std::vector<double> diag_static;
  std::vector<double> diag_number;
  std::optional<SparseOperator> sw2_extra;

  std::size_t dim() const { return diag_number.size(); }

  /// out = H(delta) * in
  void apply(double delta, std::span<const cplx> in, std::span<cplx> out) const;
  Eigen::MatrixXcd dense(double delta) const;
};

/// Full Rydberg Hamiltonian projected onto the blockaded space. Pairs beyond
/// `cutoff` (units of a) are dropped from the interaction diagonal.
HamiltonianParts build_rydberg(const Lattice& lat, const ConstrainedBasis& basis,
                               const PhysicalParams& p,
                               std::optional<double> cutoff = std::nullopt);

/// Ideal constrained flip model: same flip part, no interactions.
HamiltonianParts build_pxp(const Lattice& lat, const ConstrainedBasis& basis,
                           const PhysicalParams& p);

/// Rydberg Hamiltonian plus the second-order Omega^2/(4 V0) corrections from
/// virtual blockade-violating excitations.
HamiltonianParts build_sw2(const Lattice& lat, const ConstrainedBasis& basis,
                           const PhysicalParams& p,
                           std::optional<double> cutoff = std::nullopt);

}  // namespace scarsim
