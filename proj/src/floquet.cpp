#include "scarsim/floquet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "scarsim/analysis.hpp"
#include "scarsim/parallel.hpp"

namespace scarsim {

PulsedParams PulsedParams::from_theta(double theta, double omega_tau,
                                      int n_periods) {
  PulsedParams p{theta - kPi, omega_tau, n_periods};
  p.validate();
  return p;
}

void PulsedParams::validate() const {
  if (!std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite");
  if (!(omega_tau >= 0.0) || !std::isfinite(omega_tau))
    throw InvalidArgument("Omega * tau must be non-negative");
  if (n_periods < 1) throw InvalidArgument("n_periods must be at least 1");
}

std::string_view to_string(Boundary b) {
  return b == Boundary::open ? "open" : "periodic";
}

Boundary boundary_from_string(std::string_view name) {
  if (name == "open") return Boundary::open;
  if (name == "periodic") return Boundary::periodic;
  throw InvalidArgument("boundary must be \"open\" or \"periodic\", got \"" +
                        std::string(name) + "\"");
}

Lattice pulsed_chain(int length, Boundary boundary) {
  const bool periodic = boundary == Boundary::periodic;
  const int limit = periodic ? 18 : 24;
  if (length > limit)
    throw CapacityError("pulsed-model chains are limited to " +
                        std::to_string(limit) + " sites with " +
                        std::string(to_string(boundary)) +
                        " boundaries, got " + std::to_string(length));
  if (length < 2) throw InvalidArgument("chain needs at least 2 sites");
  return build_lattice(LatticeKind::chain, {length, 1, periodic});
}

HamiltonianParts unit_pxp(const Lattice& lat, const ConstrainedBasis& basis) {
  return build_pxp(lat, basis, PhysicalParams{1.0, 1.0});
}

StateVector apply_period(const StateVector& psi, const PulsedParams& params,
                         const ConstrainedBasis& basis,
                         const HamiltonianParts& pxp, int krylov_dim) {
  if (static_cast<std::size_t>(psi.size()) != basis.dim() ||
      pxp.dim() != basis.dim())
    throw InvalidArgument("state, basis and generator dimensions disagree");
  StateVector out = psi;
  if (params.omega_tau != 0.0)
    out = propagate_step(pxp, DriveProfile::constant(0.0), psi, 0.0,
                         params.omega_tau, krylov_dim);
  const double theta = params.theta();
  for (std::size_t k = 0; k < basis.dim(); ++k)
    out(static_cast<Eigen::Index>(k)) *=
        std::polar(1.0, -theta * std::popcount(basis[k]));
  return out;
}

namespace {

struct ChainSetup {
  Lattice lat;
  ConstrainedBasis basis;
  HamiltonianParts pxp;
  Bits initial;
};

ChainSetup setup(int length, Boundary boundary, const std::string& state) {
  auto lat = pulsed_chain(length, boundary);
  auto basis = enumerate_blockaded(lat);
  auto pxp = unit_pxp(lat, basis);
  const Bits s = named_state(lat, state);
  return {std::move(lat), std::move(basis), std::move(pxp), s};
}

FloquetMap empty_map(int length, Boundary boundary,
                     const std::vector<double>& epsilons,
                     const std::vector<double>& omega_taus, int n_periods,
                     const std::string& state) {
  if (epsilons.empty() || omega_taus.empty())
    throw InvalidArgument("Floquet map grids must be non-empty");
  if (n_periods < 1) throw InvalidArgument("n_periods must be at least 1");
  FloquetMap m;
  m.length = length;
  m.boundary = boundary;
  m.n_periods = n_periods;
  m.initial_state = state;
  m.epsilons = epsilons;
  m.omega_taus = omega_taus;
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(epsilons.size()),
                                   static_cast<Eigen::Index>(omega_taus.size()));
  return m;
}

}  // namespace

FloquetMap revival_fidelity_map(int length, Boundary boundary,
                                const std::vector<double>& epsilons,
                                const std::vector<double>& omega_taus,
                                int n_periods, const std::string& initial_state,
                                int jobs) {
  auto m = empty_map(length, boundary, epsilons, omega_taus, n_periods,
                     initial_state);
  const auto s = setup(length, boundary, initial_state);
  const auto cols = omega_taus.size();
  parallel_for(epsilons.size() * cols, jobs, [&](std::size_t idx) {
    const auto i = idx / cols, j = idx % cols;
    const PulsedParams p{epsilons[i], omega_taus[j], n_periods};
    p.validate();
    const auto k0 = static_cast<Eigen::Index>(s.basis.index_of(s.initial));
    StateVector psi = basis_vector(s.basis, s.initial);
    double sum = 0.0;
    for (int n = 1; n <= n_periods; ++n) {
      psi = apply_period(psi, p, s.basis, s.pxp);
      psi = apply_period(psi, p, s.basis, s.pxp);
      sum += std::norm(psi(k0));
    }
    m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        sum / n_periods;
  });
  return m;
}

std::vector<double> stroboscopic_imbalance(const Lattice& lat,
                                           const ConstrainedBasis& basis,
                                           const HamiltonianParts& pxp,
                                           const PulsedParams& params,
                                           Bits initial) {
  params.validate();
  const int na = lat.count(Sublattice::A), nb = lat.count(Sublattice::B);
  auto imb = [&](const StateVector& psi) {
    const auto pop = site_populations(basis, psi);
    double a = 0.0, b = 0.0;
    for (int i = 0; i < lat.n_sites(); ++i)
      (lat.sublattice()[static_cast<std::size_t>(i)] == Sublattice::A ? a : b) +=
          pop[static_cast<std::size_t>(i)];
    return (na ? a / na : 0.0) - (nb ? b / nb : 0.0);
  };
  StateVector psi = basis_vector(basis, initial);
  std::vector<double> out{imb(psi)};
  for (int n = 1; n <= params.n_periods; ++n) {
    psi = apply_period(psi, params, basis, pxp);
    out.push_back(imb(psi));
  }
  return out;
}

FloquetMap pulsed_subharmonic_map(int length, Boundary boundary,
                                  const std::vector<double>& epsilons,
                                  const std::vector<double>& omega_taus,
                                  int n_periods,
                                  const std::string& initial_state, int jobs) {
  auto m = empty_map(length, boundary, epsilons, omega_taus, n_periods,
                     initial_state);
  const auto s = setup(length, boundary, initial_state);
  std::vector<double> times(static_cast<std::size_t>(n_periods) + 1);
  for (std::size_t n = 0; n < times.size(); ++n) times[n] = static_cast<double>(n);
  const auto cols = omega_taus.size();
  parallel_for(epsilons.size() * cols, jobs, [&](std::size_t idx) {
    const auto i = idx / cols, j = idx % cols;
    const PulsedParams p{epsilons[i], omega_taus[j], n_periods};
    const auto series = stroboscopic_imbalance(s.lat, s.basis, s.pxp, p,
                                               s.initial);
    const auto spec = fourier_spectrum(times, series, kPi);
    m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        subharmonic_weight(spec, kTwoPi);
  });
  return m;
}

double transfer_probability(const Lattice& lat, const ConstrainedBasis& basis,
                            const HamiltonianParts& pxp, double omega_tau) {
  const auto c = canonical_states(lat);
  StateVector psi = basis_vector(basis, c.af1);
  if (omega_tau != 0.0)
    psi = propagate_step(pxp, DriveProfile::constant(0.0), psi, 0.0, omega_tau,
                         24);
  return std::norm(psi(static_cast<Eigen::Index>(basis.index_of(c.af2))));
}

double optimal_transfer_time(const Lattice& lat, const ConstrainedBasis& basis,
                             const HamiltonianParts& pxp, double lo,
                             double hi) {
  if (!(hi > lo) || lo < 0.0)
    throw InvalidArgument("transfer-time search needs 0 <= lo < hi");
  auto f = [&](double t) { return transfer_probability(lat, basis, pxp, t); };
  const int n = 64;
  int best = 0;
  double best_v = -1.0;
  for (int k = 0; k <= n; ++k) {
    const double v = f(lo + (hi - lo) * k / n);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / n;
  double b = lo + (hi - lo) * std::min(best + 1, n) / n;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-9) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

Eigen::MatrixXcd floquet_unitary(const PulsedParams& params,
                                 const ConstrainedBasis& basis,
                                 const HamiltonianParts& pxp) {
  if (basis.dim() > kDenseMaxDim)
    throw CapacityError("dense Floquet unitary limited to dimension " +
                        std::to_string(kDenseMaxDim) + ", got " +
                        std::to_string(basis.dim()));
  Eigen::MatrixXcd u = dense_propagator(pxp, 0.0, params.omega_tau);
  const double theta = params.theta();
  for (std::size_t k = 0; k < basis.dim(); ++k)
    u.row(static_cast<Eigen::Index>(k)) *=
        std::polar(1.0, -theta * std::popcount(basis[k]));
  return u;
}

namespace {

std::vector<double> class_distribution(const StateVector& v,
                                       const MicrostateOrdering& ordering) {
  std::vector<double> p(ordering.classes.size(), 0.0);
  for (Eigen::Index k = 0; k < v.size(); ++k)
    p[ordering.class_of[static_cast<std::size_t>(k)]] += std::norm(v(k));
  return p;
}

StateVector fix_phase(StateVector v, Eigen::Index af1) {
  const cplx a = v(af1);
  if (std::abs(a) > 0.0) v *= std::conj(a) / std::abs(a);
  return v;
}

}  // namespace

FloquetEigenstateReport floquet_eigenstate_overlap(
    const PulsedParams& params, const Lattice& lat,
    const ConstrainedBasis& basis, const HamiltonianParts& pxp,
    const MicrostateOrdering& ordering) {
  params.validate();
  if (ordering.class_of.size() != basis.dim())
    throw InvalidArgument("microstate ordering does not match the basis");
  const Eigen::MatrixXcd u = floquet_unitary(params, basis, pxp);
  // U_F is normal, so its Schur vectors are eigenvectors.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(u);
  if (schur.info() != Eigen::Success)
    throw NumericalError("Schur decomposition of U_F failed");
  const Eigen::MatrixXcd& q = schur.matrixU();
  const Eigen::VectorXcd lambda = schur.matrixT().diagonal();

  const auto c = canonical_states(lat);
  const auto i1 = static_cast<Eigen::Index>(basis.index_of(c.af1));
  const auto i2 = static_cast<Eigen::Index>(basis.index_of(c.af2));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(q.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto weight = [&](Eigen::Index k) {
    return std::norm(q(i1, k)) + std::norm(q(i2, k));
  };
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return weight(a) > weight(b);
  });

  FloquetEigenstateReport r;
  r.spectrum = lambda;
  r.unitarity_error = (lambda.cwiseAbs().array() - 1.0).abs().maxCoeff();
  for (int m = 0; m < 2; ++m) {
    const Eigen::Index k = order[static_cast<std::size_t>(m)];
    FloquetMode mode;
    mode.eigenvalue = lambda(k);
    mode.vector = fix_phase(q.col(k), i1);
    mode.vector /= mode.vector.norm();
    mode.overlap_af1 = std::norm(mode.vector(i1));
    mode.overlap_af2 = std::norm(mode.vector(i2));
    mode.class_probs = class_distribution(mode.vector, ordering);
    r.modes[static_cast<std::size_t>(m)] = std::move(mode);
  }
  r.symmetric = (r.modes[0].vector + r.modes[1].vector) / std::sqrt(2.0);
  r.antisymmetric = (r.modes[0].vector - r.modes[1].vector) / std::sqrt(2.0);
  r.symmetric_probs = class_distribution(r.symmetric, ordering);
  r.antisymmetric_probs = class_distribution(r.antisymmetric, ordering);
  return r;
}

TwoModeAgreement two_mode_agreement(const FloquetEigenstateReport& report,
                                    const PulsedParams& params,
                                    const Lattice& lat,
                                    const ConstrainedBasis& basis,
                                    const HamiltonianParts& pxp,
                                    const MicrostateOrdering& ordering) {
  params.validate();
  const auto c = canonical_states(lat);
  StateVector psi = basis_vector(basis, c.af1);
  const auto& m0 = report.modes[0];
  const auto& m1 = report.modes[1];
  const cplx a0 = m0.vector.dot(psi);  // <v0|AF1>
  const cplx a1 = m1.vector.dot(psi);
  TwoModeAgreement out;
  out.captured = std::norm(a0) + std::norm(a1);
  if (!(out.captured > 0.0))
    throw NumericalError("dominant modes have no overlap with AF1");

  double total = 0.0;
  cplx l0 = 1.0, l1 = 1.0;
  for (int n = 0; n <= params.n_periods; ++n) {
    if (n > 0) {
      psi = apply_period(psi, params, basis, pxp);
      l0 *= m0.eigenvalue;
      l1 *= m1.eigenvalue;
    }
    StateVector two = l0 * a0 * m0.vector + l1 * a1 * m1.vector;
    two /= two.norm();
    const auto p = class_distribution(psi, ordering);
    const auto q = class_distribution(two, ordering);
    double tv = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - q[k]);
    total += 0.5 * tv;
  }
  out.mean_tv_distance = total / (params.n_periods + 1);
  return out;
}

}  // namespace scarsim
