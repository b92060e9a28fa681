#include "scarsim/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace scarsim {

SparseOperator SparseOperator::hermitian_from_upper(
    std::size_t dim, std::span<const Triplet> upper) {
  std::vector<std::vector<std::pair<std::size_t, cplx>>> rows(dim);
  for (const auto& t : upper) {
    if (t.row >= dim || t.col >= dim)
      throw InvalidArgument("operator entry outside the dimension");
    if (t.row > t.col)
      throw InvalidArgument("hermitian_from_upper expects row <= col");
    if (t.row == t.col) {
      rows[t.row].emplace_back(t.col, cplx(t.value.real(), 0.0));
    } else {
      rows[t.row].emplace_back(t.col, t.value);
      rows[t.col].emplace_back(t.row, std::conj(t.value));
    }
  }
  SparseOperator op;
  op.dim_ = dim;
  op.hermitian_ = true;
  op.row_ptr_.reserve(dim + 1);
  for (auto& r : rows) {
    std::sort(r.begin(), r.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // Merge duplicates so every (row, col) is stored once.
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (!op.cols_.empty() && op.cols_.size() > op.row_ptr_.back() &&
          op.cols_.back() == r[k].first) {
        op.values_.back() += r[k].second;
      } else {
        op.cols_.push_back(r[k].first);
        op.values_.push_back(r[k].second);
      }
    }
    op.row_ptr_.push_back(op.cols_.size());
  }
  return op;
}

void SparseOperator::apply(std::span<const cplx> in, std::span<cplx> out) const {
  for (std::size_t r = 0; r < dim_; ++r) {
    cplx acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      acc += values_[k] * in[cols_[k]];
    out[r] = acc;
  }
}

void SparseOperator::apply_add(std::span<const cplx> in, std::span<cplx> out,
                               cplx scale) const {
  for (std::size_t r = 0; r < dim_; ++r) {
    cplx acc = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      acc += values_[k] * in[cols_[k]];
    out[r] += scale * acc;
  }
}

std::vector<Triplet> SparseOperator::triplets() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      t.push_back({r, cols_[k], values_[k]});
  return t;
}

Eigen::MatrixXcd SparseOperator::to_dense() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& t : triplets())
    m(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) =
        t.value;
  return m;
}

double SparseOperator::row_sum_norm() const {
  double best = 0.0;
  for (std::size_t r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
      s += std::abs(values_[k]);
    best = std::max(best, s);
  }
  return best;
}

void SparseOperator::write_triplets(std::ostream& os) const {
  char buf[128];
  for (const auto& t : triplets()) {
    std::snprintf(buf, sizeof buf, "%zu %zu %.17g %.17g\n", t.row, t.col,
                  t.value.real() + 0.0, t.value.imag() + 0.0);
    os << buf;
  }
}

std::string_view to_string(DriveShape shape) {
  switch (shape) {
    case DriveShape::constant: return "constant";
    case DriveShape::cosine: return "cosine";
    case DriveShape::square: return "square";
    case DriveShape::pulsed: return "pulsed";
  }
  return "unknown";
}

DriveShape drive_shape_from_string(std::string_view name) {
  for (auto s : {DriveShape::constant, DriveShape::cosine, DriveShape::square,
                 DriveShape::pulsed})
    if (to_string(s) == name) return s;
  throw InvalidArgument("unknown drive shape '" + std::string(name) + "'");
}

DriveProfile DriveProfile::constant(double delta) {
  DriveProfile d;
  d.delta0 = delta;
  return d;
}

DriveProfile DriveProfile::cosine(double delta0, double deltam, double omegam) {
  DriveProfile d{DriveShape::cosine, delta0, deltam, omegam, 0.0, 0.0};
  d.validate();
  return d;
}

DriveProfile DriveProfile::square(double delta0, double deltam, double omegam) {
  DriveProfile d{DriveShape::square, delta0, deltam, omegam, 0.0, 0.0};
  d.validate();
  return d;
}

DriveProfile DriveProfile::pulsed(double theta, double tau) {
  DriveProfile d{DriveShape::pulsed, 0.0, 0.0, 0.0, theta, tau};
  d.validate();
  return d;
}

double DriveProfile::period() const {
  if (periodic()) return kTwoPi / omegam;
  if (shape == DriveShape::pulsed) return tau;
  return std::numeric_limits<double>::infinity();
}

void DriveProfile::validate() const {
  if (periodic() && !(omegam > 0.0))
    throw InvalidArgument("periodic drives need a positive modulation "
                          "frequency");
  if (shape == DriveShape::pulsed) {
    if (!(tau > 0.0)) throw InvalidArgument("pulsed drive needs tau > 0");
    if (delta0 != 0.0 || deltam != 0.0)
      throw InvalidArgument("pulsed drive does not use delta0/deltam");
  }
}

double detuning_at(const DriveProfile& drive, double t) {
  switch (drive.shape) {
    case DriveShape::constant:
      return drive.delta0;
    case DriveShape::cosine:
      return drive.delta0 + drive.deltam * std::cos(drive.omegam * t);
    case DriveShape::square:
      return drive.delta0 +
             drive.deltam * (std::cos(drive.omegam * t) >= 0.0 ? 1.0 : -1.0);
    case DriveShape::pulsed:
      break;
  }
  throw InvalidArgument("pulsed drives have no continuous detuning");
}

void HamiltonianParts::apply(double delta, std::span<const cplx> in,
                             std::span<cplx> out) const {
  flip.apply(in, out);
  for (std::size_t k = 0; k < diag_number.size(); ++k)
    out[k] += (diag_static[k] - delta * diag_number[k]) * in[k];
  if (sw2_extra) sw2_extra->apply_add(in, out);
}

Eigen::MatrixXcd HamiltonianParts::dense(double delta) const {
  Eigen::MatrixXcd h = flip.to_dense();
  for (std::size_t k = 0; k < dim(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    h(i, i) += diag_static[k] - delta * diag_number[k];
  }
  if (sw2_extra) h += sw2_extra->to_dense();
  return h;
}

namespace {

void check_basis(const Lattice& lat, const ConstrainedBasis& basis) {
  if (lat.n_sites() != basis.n_sites())
    throw InvalidArgument("basis was enumerated for " +
                          std::to_string(basis.n_sites()) +
                          " sites but the lattice has " +
                          std::to_string(lat.n_sites()));
}

SparseOperator flip_operator(const ConstrainedBasis& basis, int n_sites,
                             double omega) {
  std::vector<Triplet> upper;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const Bits s = basis[k];
    for (int i = 0; i < n_sites; ++i) {
      if (!((s >> i) & 1u)) continue;
      // De-exciting an atom always stays inside the blockaded space, and the
      // cleared state has a smaller integer value, hence a smaller index.
      const std::size_t j = basis.index_of(s & ~(Bits{1} << i));
      upper.push_back({j, k, cplx(0.5 * omega, 0.0)});
    }
  }
  return SparseOperator::hermitian_from_upper(basis.dim(), upper);
}

std::vector<double> number_diagonal(const ConstrainedBasis& basis) {
  std::vector<double> d(basis.dim());
  for (std::size_t k = 0; k < basis.dim(); ++k)
    d[k] = static_cast<double>(std::popcount(basis[k]));
  return d;
}

std::vector<double> interaction_diagonal(const Lattice& lat,
                                         const ConstrainedBasis& basis,
                                         const PhysicalParams& p,
                                         std::optional<double> cutoff) {
  const int n = lat.n_sites();
  struct Pair {
    int i, j;
    double v;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (lat.is_nearest_neighbor(i, j)) continue;  // blockaded: n_i n_j = 0
      const double d = lat.distance(i, j);
      if (cutoff && d > *cutoff + kShellTolerance) continue;
      pairs.push_back({i, j, p.v0 / std::pow(d, 6)});
    }
  std::vector<double> diag(basis.dim(), 0.0);
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const Bits s = basis[k];
    double e = 0.0;
    for (const auto& pr : pairs)
      if (((s >> pr.i) & 1u) && ((s >> pr.j) & 1u)) e += pr.v;
    diag[k] = e;
  }
  return diag;
}

}  // namespace

HamiltonianParts build_rydberg(const Lattice& lat, const ConstrainedBasis& basis,
                               const PhysicalParams& p,
                               std::optional<double> cutoff) {
  check_basis(lat, basis);
  p.validate();
  return {flip_operator(basis, lat.n_sites(), p.omega),
          interaction_diagonal(lat, basis, p, cutoff), number_diagonal(basis),
          std::nullopt};
}

HamiltonianParts build_pxp(const Lattice& lat, const ConstrainedBasis& basis,
                           const PhysicalParams& p) {
  check_basis(lat, basis);
  if (!(p.omega > 0.0)) throw InvalidArgument("Rabi frequency must be positive");
  return {flip_operator(basis, lat.n_sites(), p.omega),
          std::vector<double>(basis.dim(), 0.0), number_diagonal(basis),
          std::nullopt};
}

HamiltonianParts build_sw2(const Lattice& lat, const ConstrainedBasis& basis,
                           const PhysicalParams& p,
                           std::optional<double> cutoff) {
  HamiltonianParts parts = build_rydberg(lat, basis, p, cutoff);
  const int n = lat.n_sites();
  const double g = p.omega * p.omega / (4.0 * p.v0);
  std::vector<Bits> masks(n);
  for (int i = 0; i < n; ++i) masks[i] = lat.neighbor_mask(i);

  std::vector<Triplet> upper;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const Bits s = basis[k];
    // Multi-site term: a ground-state atom with m >= 1 excited neighbours
    // gets (g / m) * sigma^z = -g / m. Excited atoms never have excited
    // neighbours inside the blockaded space.
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      const int m = std::popcount(masks[i] & s);
      if (m == 0) continue;
      const double z = ((s >> i) & 1u) ? 1.0 : -1.0;
      diag += g * z / m;
    }
    if (diag != 0.0) upper.push_back({k, k, cplx(diag, 0.0)});

    // Constrained hopping of an excitation from i to a neighbour j; the
    // target is valid exactly when the other neighbours of j are empty.
    for (int i = 0; i < n; ++i) {
      if (!((s >> i) & 1u)) continue;
      for (int j : lat.neighbors()[i]) {
        const Bits t = (s & ~(Bits{1} << i)) | (Bits{1} << j);
        const auto idx = basis.find(t);
        if (idx == ConstrainedBasis::npos || idx <= k) continue;
        upper.push_back({k, idx, cplx(-g, 0.0)});
      }
    }
  }
  parts.sw2_extra = SparseOperator::hermitian_from_upper(basis.dim(), upper);
  return parts;
}

}  // namespace scarsim
