#include "scarsim/evolve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <span>

namespace scarsim {

void QuenchResult::validate() const {
  const auto n = times.size();
  for (std::size_t k = 1; k < n; ++k)
    if (!(times[k] > times[k - 1]))
      throw InvalidArgument("snapshot times must be strictly increasing");
  if (n > 2) {
    const double h = (times[n - 1] - times[0]) / static_cast<double>(n - 1);
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(times[k] - times[k - 1] - h) > 1e-9 * std::max(1.0, h))
        throw InvalidArgument("snapshot times must be uniformly spaced");
  }
  if (n_a.size() != n || n_b.size() != n ||
      (!site_populations.empty() && site_populations.size() != n) ||
      (!microstate_probs.empty() && microstate_probs.size() != n))
    throw InvalidArgument("quench series lengths disagree with the time axis");
  if (entropies.size() != entropy_cuts.size())
    throw InvalidArgument("one entropy series is needed per cut");
  for (const auto& e : entropies)
    if (e.size() != n)
      throw InvalidArgument("entropy series length disagrees with the time "
                            "axis");
}

StateVector basis_vector(const ConstrainedBasis& basis, Bits s) {
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(basis.dim()));
  v(static_cast<Eigen::Index>(basis.index_of(s))) = 1.0;
  return v;
}

StateVector random_state(std::size_t dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  StateVector v(static_cast<Eigen::Index>(dim));
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v / v.norm();
}

StateVector krylov_expm(const HermitianApply& apply, const StateVector& v,
                        double t, int krylov_dim, double tol) {
  if (krylov_dim < 1) throw InvalidArgument("Krylov dimension must be >= 1");
  const Eigen::Index n = v.size();
  const double norm0 = v.norm();
  if (n == 0 || norm0 == 0.0 || t == 0.0) return v;
  const Eigen::Index m = std::min<Eigen::Index>(krylov_dim, n);

  StateVector w = v;
  Eigen::MatrixXcd V(n, m + 1);
  StateVector tmp(n);
  std::vector<double> alpha(static_cast<std::size_t>(m));
  std::vector<double> beta(static_cast<std::size_t>(m));
  double remaining = t;
  int substeps = 0;

  while (remaining != 0.0) {
    if (++substeps > 100000)
      throw NumericalError("Krylov propagation needed more than 1e5 substeps");
    const double wn = w.norm();
    V.col(0) = w / wn;
    Eigen::Index k = m;
    bool invariant = false;
    double scale = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      apply(V.col(j).data(), tmp.data());
      const double a = V.col(j).dot(tmp).real();
      tmp -= a * V.col(j);
      if (j > 0) tmp -= beta[static_cast<std::size_t>(j - 1)] * V.col(j - 1);
      for (int pass = 0; pass < 2; ++pass)
        tmp -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * tmp);
      const double b = tmp.norm();
      alpha[static_cast<std::size_t>(j)] = a;
      beta[static_cast<std::size_t>(j)] = b;
      scale = std::max(scale, std::abs(a) + b);
      if (!std::isfinite(b))
        throw NumericalError("non-finite value during Krylov expansion");
      if (b <= 1e-14 * std::max(1.0, scale)) {
        k = j + 1;
        invariant = true;
        break;
      }
      V.col(j + 1) = tmp / b;
    }

    Eigen::VectorXd diag(k), sub(std::max<Eigen::Index>(k - 1, 0));
    for (Eigen::Index j = 0; j < k; ++j) diag(j) = alpha[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j + 1 < k; ++j) sub(j) = beta[static_cast<std::size_t>(j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
      throw NumericalError("tridiagonal eigensolver failed");
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& Q = es.eigenvectors();

    double delta = remaining;
    Eigen::VectorXcd c(k);
    for (;;) {
      for (Eigen::Index r = 0; r < k; ++r) {
        cplx acc = 0.0;
        for (Eigen::Index q = 0; q < k; ++q)
          acc += Q(r, q) * std::exp(cplx(0.0, -lam(q) * delta)) * Q(0, q);
        c(r) = acc;
      }
      const double err =
          invariant ? 0.0 : beta[static_cast<std::size_t>(k - 1)] * std::abs(c(k - 1));
      if (err <= tol) break;
      // The local error grows roughly like delta^k.
      const double shrink = std::clamp(
          0.9 * std::pow(tol / err, 1.0 / static_cast<double>(k)), 0.1, 0.5);
      delta *= shrink;
      if (std::abs(delta) < 1e-14 * std::abs(t))
        throw NumericalError("Krylov step size underflow");
    }
    w = wn * (V.leftCols(k) * c);
    remaining -= delta;
    if (std::abs(remaining) <= 1e-15 * std::abs(t)) remaining = 0.0;
  }
  return w;
}

namespace {

double step_detuning(const DriveProfile& drive, double t_mid) {
  if (drive.shape == DriveShape::constant) return drive.delta0;
  return detuning_at(drive, t_mid);
}

HermitianApply make_apply(const HamiltonianParts& parts, double delta) {
  const std::size_t n = parts.dim();
  return [&parts, delta, n](const cplx* x, cplx* y) {
    parts.apply(delta, std::span<const cplx>(x, n), std::span<cplx>(y, n));
  };
}

void check_finite(const StateVector& psi) {
  if (!psi.allFinite()) throw NumericalError("state vector became non-finite");
}

}  // namespace

StateVector propagate_step(const HamiltonianParts& parts,
                           const DriveProfile& drive, const StateVector& psi,
                           double t, double dt, int krylov_dim) {
  if (static_cast<std::size_t>(psi.size()) != parts.dim())
    throw InvalidArgument("state dimension does not match the Hamiltonian");
  const double delta = step_detuning(drive, t + 0.5 * dt);
  StateVector out = krylov_expm(make_apply(parts, delta), psi, dt, krylov_dim);
  check_finite(out);
  return out / out.norm();
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw InvalidArgument("evolution dt must be positive");
  if (krylov_dim < 4) throw InvalidArgument("krylov_dim must be at least 4");
  if (record_stride < 1) throw InvalidArgument("record_stride must be >= 1");
  if (!(total_time >= 0.0) || !std::isfinite(total_time))
    throw InvalidArgument("total_time must be non-negative");
  if (total_time / dt > 1e9) throw CapacityError("more than 1e9 time steps");
}

long EvolutionConfig::n_steps() const {
  return std::lround(total_time / dt);
}

std::vector<double> site_populations(const ConstrainedBasis& basis,
                                     const StateVector& psi) {
  const int n = basis.n_sites();
  std::vector<double> pop(static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const double p = std::norm(psi(static_cast<Eigen::Index>(k)));
    Bits s = basis[k];
    while (s) {
      pop[static_cast<std::size_t>(std::countr_zero(s))] += p;
      s &= s - 1;
    }
  }
  return pop;
}

double energy(const HamiltonianParts& parts, double delta,
              const StateVector& psi) {
  StateVector h(psi.size());
  parts.apply(delta, std::span<const cplx>(psi.data(), parts.dim()),
              std::span<cplx>(h.data(), parts.dim()));
  return psi.dot(h).real();
}

QuenchResult run_quench(const Lattice& lat, const ConstrainedBasis& basis,
                        const HamiltonianParts& parts, const DriveProfile& drive,
                        const StateVector& psi0, const EvolutionConfig& cfg,
                        const ObservableRequest& obs,
                        const MicrostateOrdering* ordering) {
  cfg.validate();
  drive.validate();
  if (drive.shape == DriveShape::pulsed)
    throw InvalidArgument("pulsed drives are evolved by the floquet module");
  if (lat.n_sites() != basis.n_sites() ||
      static_cast<std::size_t>(psi0.size()) != basis.dim() ||
      parts.dim() != basis.dim())
    throw InvalidArgument("lattice, basis, Hamiltonian and state dimensions "
                          "disagree");
  if (std::abs(psi0.norm() - 1.0) > 1e-9)
    throw InvalidArgument("initial state is not normalized");
  QuenchRecorder rec(lat, basis, obs, ordering);
  auto record = [&](double t, const StateVector& psi) { rec.record(t, psi); };

  const long steps = cfg.n_steps();
  const long stride = cfg.record_stride;
  StateVector psi = psi0;
  record(0.0, psi);

  if (drive.shape == DriveShape::constant) {
    const HermitianApply apply = make_apply(parts, drive.delta0);
    long done = 0;
    while (done < steps) {
      const long chunk = std::min(stride, steps - done);
      psi = krylov_expm(apply, psi, static_cast<double>(chunk) * cfg.dt,
                        cfg.krylov_dim);
      check_finite(psi);
      psi /= psi.norm();
      done += chunk;
      if (done % stride == 0) record(static_cast<double>(done) * cfg.dt, psi);
    }
  } else {
    long sub = 1;
    if (cfg.enforce_drive_resolution) {
      const double max_h = drive.period() / 200.0;
      sub = std::max(1L, static_cast<long>(std::ceil(cfg.dt / max_h - 1e-9)));
    }
    const double h = cfg.dt / static_cast<double>(sub);
    for (long s = 0; s < steps; ++s) {
      const double t0 = static_cast<double>(s) * cfg.dt;
      for (long q = 0; q < sub; ++q)
        psi = propagate_step(parts, drive, psi, t0 + static_cast<double>(q) * h,
                             h, cfg.krylov_dim);
      if ((s + 1) % stride == 0)
        record(static_cast<double>(s + 1) * cfg.dt, psi);
    }
  }
  auto r = rec.take();
  r.final_state = psi;
  return r;
}

QuenchRecorder::QuenchRecorder(const Lattice& lat,
                               const ConstrainedBasis& basis,
                               const ObservableRequest& obs,
                               const MicrostateOrdering* ordering)
    : lat_(lat), basis_(basis), obs_(obs), ordering_(ordering) {
  if (lat.n_sites() != basis.n_sites())
    throw InvalidArgument("lattice and basis site counts disagree");
  if (obs.microstates &&
      (ordering == nullptr || ordering->class_of.size() != basis.dim()))
    throw InvalidArgument("microstate output needs an ordering for this basis");
  for (int cut : obs.entropy_cuts)
    if (cut < 1 || cut >= lat.n_sites())
      throw InvalidArgument("entropy cut " + std::to_string(cut) +
                            " must lie in [1, n_sites - 1]");
  r_.entropy_cuts = obs.entropy_cuts;
  r_.entropies.resize(obs.entropy_cuts.size());
}

void QuenchRecorder::record(double t, const StateVector& psi) {
  const int na = lat_.count(Sublattice::A);
  const int nb = lat_.count(Sublattice::B);
  r_.times.push_back(t);
  auto pop = site_populations(basis_, psi);
  double sa = 0.0, sb = 0.0;
  for (int i = 0; i < lat_.n_sites(); ++i)
    (lat_.sublattice()[static_cast<std::size_t>(i)] == Sublattice::A ? sa : sb) +=
        pop[static_cast<std::size_t>(i)];
  r_.n_a.push_back(na > 0 ? sa / na : 0.0);
  r_.n_b.push_back(nb > 0 ? sb / nb : 0.0);
  r_.site_populations.push_back(std::move(pop));
  if (obs_.microstates) {
    std::vector<double> probs(ordering_->classes.size(), 0.0);
    for (std::size_t k = 0; k < basis_.dim(); ++k)
      probs[ordering_->class_of[k]] +=
          std::norm(psi(static_cast<Eigen::Index>(k)));
    r_.microstate_probs.push_back(std::move(probs));
  }
  for (std::size_t c = 0; c < obs_.entropy_cuts.size(); ++c)
    r_.entropies[c].push_back(cut_entropy(psi, basis_, obs_.entropy_cuts[c]));
  r_.final_state = psi;
}

QuenchResult QuenchRecorder::take() { return std::move(r_); }

namespace {

Bits gather_bits(Bits s, const std::vector<int>& sites) {
  Bits out = 0;
  for (std::size_t j = 0; j < sites.size(); ++j)
    if ((s >> sites[j]) & 1u) out |= Bits{1} << j;
  return out;
}

}  // namespace

ReducedDensityMatrix reduced_density_matrix(const StateVector& psi,
                                            const ConstrainedBasis& basis,
                                            const std::vector<int>& subset) {
  const int n = basis.n_sites();
  if (static_cast<std::size_t>(psi.size()) != basis.dim())
    throw InvalidArgument("state dimension does not match the basis");
  if (subset.empty() || static_cast<int>(subset.size()) >= n)
    throw InvalidArgument("subset must be nonempty and proper");
  Bits mask = 0;
  for (int i : subset) {
    if (i < 0 || i >= n)
      throw InvalidArgument("subset site " + std::to_string(i) +
                            " out of range");
    if ((mask >> i) & 1u) throw InvalidArgument("subset sites must be unique");
    mask |= Bits{1} << i;
  }

  struct Entry {
    Bits rest;
    Bits config;
    std::size_t k;
  };
  std::vector<Entry> entries;
  entries.reserve(basis.dim());
  std::vector<Bits> configs;
  for (std::size_t k = 0; k < basis.dim(); ++k) {
    const Bits s = basis[k];
    entries.push_back({s & ~mask, gather_bits(s, subset), k});
    configs.push_back(entries.back().config);
  }
  std::sort(configs.begin(), configs.end());
  configs.erase(std::unique(configs.begin(), configs.end()), configs.end());
  if (configs.size() > 4096)
    throw CapacityError("reduced density matrix would have dimension " +
                        std::to_string(configs.size()) + " (limit 4096)");
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.rest < b.rest; });

  const auto d = static_cast<Eigen::Index>(configs.size());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  auto slot = [&](Bits c) {
    return static_cast<Eigen::Index>(
        std::lower_bound(configs.begin(), configs.end(), c) - configs.begin());
  };
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo;
    while (hi < entries.size() && entries[hi].rest == entries[lo].rest) ++hi;
    for (std::size_t a = lo; a < hi; ++a) {
      const cplx pa = psi(static_cast<Eigen::Index>(entries[a].k));
      const auto ia = slot(entries[a].config);
      for (std::size_t b = lo; b < hi; ++b)
        rho(ia, slot(entries[b].config)) +=
            pa * std::conj(psi(static_cast<Eigen::Index>(entries[b].k)));
    }
    lo = hi;
  }
  return {subset, std::move(configs), std::move(rho)};
}

Eigen::MatrixXcd ReducedDensityMatrix::full() const {
  if (sites.size() > 14)
    throw CapacityError("full embedding limited to 14 subset sites");
  const auto d = Eigen::Index{1} << sites.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t a = 0; a < configs.size(); ++a)
    for (std::size_t b = 0; b < configs.size(); ++b)
      out(static_cast<Eigen::Index>(configs[a]),
          static_cast<Eigen::Index>(configs[b])) =
          rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return out;
}

double entanglement_entropy(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0)
    throw InvalidArgument("density matrix must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho,
                                                     Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("density-matrix eigensolver failed");
  double s = 0.0;
  for (double l : es.eigenvalues()) {
    if (l < -1e-10)
      throw NumericalError("density matrix has eigenvalue " +
                           std::to_string(l) + " below zero");
    if (l >= 1e-14) s -= l * std::log(l);
  }
  return s;
}

double cut_entropy(const StateVector& psi, const ConstrainedBasis& basis,
                   int cut) {
  std::vector<int> subset(static_cast<std::size_t>(cut));
  for (int i = 0; i < cut; ++i) subset[static_cast<std::size_t>(i)] = i;
  return entanglement_entropy(reduced_density_matrix(psi, basis, subset).rho);
}

Eigen::MatrixXcd dense_propagator(const HamiltonianParts& parts, double delta,
                                  double t) {
  if (parts.dim() > kDenseMaxDim)
    throw CapacityError("dense propagator limited to dimension " +
                        std::to_string(kDenseMaxDim) + ", got " +
                        std::to_string(parts.dim()));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(parts.dense(delta));
  if (es.info() != Eigen::Success)
    throw NumericalError("dense eigensolver failed");
  Eigen::VectorXcd phase(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < phase.size(); ++k)
    phase(k) = std::exp(cplx(0.0, -es.eigenvalues()(k) * t));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace scarsim
