#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "scarsim/evolve.hpp"

using namespace scarsim;

namespace {

Lattice random_lattice(unsigned seed) {
  std::mt19937 rng(seed);
  std::vector<int> cells(16);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  cells.resize(8);
  std::sort(cells.begin(), cells.end());
  std::vector<Point> pos;
  std::vector<Sublattice> sub;
  for (int c : cells) {
    pos.push_back({static_cast<double>(c % 4), static_cast<double>(c / 4)});
    sub.push_back(((c % 4) + (c / 4)) % 2 == 0 ? Sublattice::A : Sublattice::B);
  }
  return Lattice(LatticeKind::square, pos, sub);
}

HamiltonianParts diagonal_parts(const std::vector<double>& e) {
  HamiltonianParts h;
  h.flip = SparseOperator::hermitian_from_upper(e.size(), {});
  h.diag_static = e;
  h.diag_number.assign(e.size(), 0.0);
  return h;
}

double max_diff(const StateVector& a, const StateVector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("trivial generators") {
  auto psi = random_state(5, 3);
  auto zero = diagonal_parts(std::vector<double>(5, 0.0));
  CHECK(max_diff(propagate_step(zero, DriveProfile::constant(0.0), psi, 0.0,
                                0.01),
                 psi) < 1e-15);

  const std::vector<double> e{0.3, -1.2, 4.0, 0.0, 7.5};
  auto diag = diagonal_parts(e);
  const double dt = 0.37;
  auto out = propagate_step(diag, DriveProfile::constant(0.0), psi, 0.0, dt);
  for (Eigen::Index k = 0; k < 5; ++k)
    CHECK(std::abs(out(k) - std::exp(cplx(0, -e[static_cast<std::size_t>(k)] *
                                                 dt)) *
                                psi(k)) < 1e-13);
}

TEST_CASE("Krylov step matches the dense propagator") {
  auto lat = build_lattice(LatticeKind::chain, {8});
  auto basis = enumerate_blockaded(lat);
  auto h = build_rydberg(lat, basis, PhysicalParams::from_mhz(4.2, 51.0));
  auto psi = random_state(basis.dim(), 11);
  const double delta = 0.4 * 2 * kPi;
  auto u = dense_propagator(h, delta, 0.002);
  auto kry = propagate_step(h, DriveProfile::constant(delta), psi, 0.0, 0.002);
  CHECK(max_diff(kry, u * psi) < 1e-8);

  // A large step is split internally and still agrees.
  auto big = krylov_expm(
      [&](const cplx* x, cplx* y) {
        h.apply(delta, {x, basis.dim()}, {y, basis.dim()});
      },
      psi, 0.75);
  CHECK(max_diff(big, dense_propagator(h, delta, 0.75) * psi) < 1e-9);
}

TEST_CASE("driven evolution agrees with composed dense steps") {
  for (unsigned seed : {1u, 2u}) {
    auto lat = random_lattice(seed);
    auto basis = enumerate_blockaded(lat);
    auto h = build_rydberg(lat, basis, PhysicalParams::from_mhz(4.2, 30.0));
    auto drive = DriveProfile::cosine(2.0, 5.0, 30.0);
    auto psi = random_state(basis.dim(), seed + 100);
    auto dense = psi;
    const double dt = 0.002;
    for (int s = 0; s < 200; ++s) {
      const double t = s * dt;
      psi = propagate_step(h, drive, psi, t, dt);
      dense = dense_propagator(h, detuning_at(drive, t + dt / 2), dt) * dense;
    }
    CHECK(max_diff(psi, dense) < 1e-8);
  }
}

TEST_CASE("dense propagator properties") {
  auto lat = build_lattice(LatticeKind::chain, {7});
  auto basis = enumerate_blockaded(lat);
  auto h = build_rydberg(lat, basis, PhysicalParams::from_mhz(4.2, 24.0));
  const auto n = static_cast<Eigen::Index>(basis.dim());
  auto id = Eigen::MatrixXcd::Identity(n, n);
  CHECK((dense_propagator(h, 1.0, 0.0) - id).cwiseAbs().maxCoeff() < 1e-12);
  auto u1 = dense_propagator(h, 1.0, 0.3);
  auto u2 = dense_propagator(h, 1.0, 0.45);
  CHECK((u1.adjoint() * u1 - id).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((u1 * u2 - dense_propagator(h, 1.0, 0.75)).cwiseAbs().maxCoeff() <
        1e-9);
  auto big = build_lattice(LatticeKind::chain, {16});
  auto bb = enumerate_blockaded(big);
  CHECK_THROWS_AS(
      dense_propagator(build_pxp(big, bb, PhysicalParams{1, 1}), 0.0, 1.0),
      CapacityError);
}

TEST_CASE("quench bookkeeping") {
  auto lat = build_lattice(LatticeKind::chain, {10, 1, true});
  auto basis = enumerate_blockaded(lat);
  auto h = build_rydberg(lat, basis, PhysicalParams::from_mhz(4.2, 24.0));
  EvolutionConfig cfg;
  cfg.total_time = 0.5;
  cfg.record_stride = 10;
  auto psi0 = basis_vector(basis, 0);
  auto ordering = order_microstates(reflection_grouping(basis, lat));
  auto r = run_quench(lat, basis, h, DriveProfile::constant(0.0), psi0, cfg,
                      {true, {5}}, &ordering);
  REQUIRE(r.size() == 26);
  r.validate();
  for (std::size_t k = 0; k < r.size(); ++k) {
    CHECK(r.times[k] == doctest::Approx(k * 0.02).epsilon(1e-14));
    // Translation symmetry makes both sublattices equivalent.
    CHECK(std::abs(r.n_a[k] - r.n_b[k]) < 1e-10);
    double total = 0.0;
    for (double p : r.microstate_probs[k]) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  CHECK(std::abs(r.final_state.norm() - 1.0) < 1e-9);
  CHECK(r.entropies[0][0] < 1e-12);
  CHECK(r.entropies[0].back() > 0.1);

  CHECK_THROWS_AS(run_quench(lat, basis, h, DriveProfile::constant(0.0), psi0,
                             cfg, {true, {}}, nullptr),
                  InvalidArgument);
  CHECK_THROWS_AS(run_quench(lat, basis, h, DriveProfile::constant(0.0), psi0,
                             cfg, {false, {10}}),
                  InvalidArgument);
}

TEST_CASE("ordered state imbalance starts at one") {
  auto lat = build_lattice(LatticeKind::chain, {9});
  auto basis = enumerate_blockaded(lat);
  auto h = build_pxp(lat, basis, PhysicalParams::from_mhz(4.2, 24.0));
  EvolutionConfig cfg;
  cfg.total_time = 0.0;
  auto c = canonical_states(lat);
  auto r1 = run_quench(lat, basis, h, {}, basis_vector(basis, c.af1), cfg);
  auto r2 = run_quench(lat, basis, h, {}, basis_vector(basis, c.af2), cfg);
  CHECK(r1.n_a[0] - r1.n_b[0] == 1.0);
  CHECK(r2.n_a[0] - r2.n_b[0] == -1.0);
}

TEST_CASE("conservation and convergence") {
  auto lat = build_lattice(LatticeKind::chain, {10});
  auto basis = enumerate_blockaded(lat);
  auto h = build_rydberg(lat, basis, PhysicalParams::from_mhz(4.2, 51.0));
  auto psi0 = basis_vector(basis, canonical_states(lat).af1);
  const double delta = 0.3 * 2 * kPi;

  SUBCASE("energy drift under a constant detuning") {
    EvolutionConfig cfg;
    cfg.total_time = 2.0;
    cfg.record_stride = 50;
    auto r = run_quench(lat, basis, h, DriveProfile::constant(delta), psi0, cfg);
    const double e0 = energy(h, delta, psi0);
    const double e1 = energy(h, delta, r.final_state);
    CHECK(std::abs(e1 - e0) < 1e-6 * std::abs(e0));
  }
  SUBCASE("halving dt under a cosine drive") {
    auto drive = DriveProfile::cosine(delta, 0.98 * 2 * kPi * 4.2,
                                      1.24 * 2 * kPi * 4.2);
    auto run = [&](double dt) {
      EvolutionConfig cfg;
      cfg.dt = dt;
      cfg.total_time = 1.0;
      cfg.record_stride = 1000000;
      cfg.enforce_drive_resolution = false;
      return run_quench(lat, basis, h, drive, psi0, cfg).final_state;
    };
    auto a = run(0.004), b = run(0.002), c = run(0.001);
    const double e_ab = max_diff(a, b);
    const double e_bc = max_diff(b, c);
    // Second order: each halving cuts the error by about four.
    CHECK(e_bc < e_ab / 3.0);
    CHECK(e_bc > e_ab / 5.0);
  }
  SUBCASE("forward then backward returns the initial state") {
    auto drive = DriveProfile::cosine(delta, 20.0, 30.0);
    auto psi = psi0;
    const double dt = 0.002;
    const int n = 250;
    for (int s = 0; s < n; ++s) psi = propagate_step(h, drive, psi, s * dt, dt);
    for (int s = n; s > 0; --s)
      psi = propagate_step(h, drive, psi, s * dt, -dt);
    CHECK(max_diff(psi, psi0) < 1e-7);
  }
}

TEST_CASE("reduced density matrices") {
  SUBCASE("product states") {
    auto lat = build_lattice(LatticeKind::chain, {9});
    auto basis = enumerate_blockaded(lat);
    auto psi = basis_vector(basis, canonical_states(lat).af1);
    auto rdm = reduced_density_matrix(psi, basis, {0});
    auto full = rdm.full();
    CHECK(std::abs(full(0, 0)) < 1e-15);
    CHECK(std::abs(full(1, 1) - 1.0) < 1e-15);
    CHECK(entanglement_entropy(rdm.rho) < 1e-12);
    auto half = reduced_density_matrix(psi, basis, {0, 1, 2, 3});
    CHECK(entanglement_entropy(half.rho) < 1e-12);
  }
  SUBCASE("two-site superposition") {
    auto lat = build_lattice(LatticeKind::chain, {2});
    auto basis = enumerate_blockaded(lat);
    StateVector psi = StateVector::Zero(3);
    psi(static_cast<Eigen::Index>(basis.index_of(0b10))) = 1 / std::sqrt(2.0);
    psi(static_cast<Eigen::Index>(basis.index_of(0b01))) = 1 / std::sqrt(2.0);
    auto full = reduced_density_matrix(psi, basis, {1}).full();
    CHECK(std::abs(full(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(full(1, 1) - 0.5) < 1e-15);
    CHECK(std::abs(full(0, 1)) < 1e-15);
    CHECK(entanglement_entropy(full) == doctest::Approx(std::log(2.0)));
  }
  SUBCASE("random states respect the blockaded bound") {
    auto lat = build_lattice(LatticeKind::chain, {12});
    auto basis = enumerate_blockaded(lat);
    for (unsigned seed = 0; seed < 5; ++seed) {
      auto psi = random_state(basis.dim(), seed);
      for (int cut = 1; cut < 12; ++cut) {
        std::vector<int> sub(static_cast<std::size_t>(cut));
        std::iota(sub.begin(), sub.end(), 0);
        auto rdm = reduced_density_matrix(psi, basis, sub);
        CHECK(std::abs(rdm.rho.trace() - cplx(1.0)) < 1e-12);
        CHECK((rdm.rho - rdm.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rdm.rho);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        // The subsystem's own blockaded dimension is the number of
        // configurations that can occur.
        const auto sub_dim = enumerate_blockaded(
                                 build_lattice(LatticeKind::chain, {cut}))
                                 .dim();
        CHECK(rdm.configs.size() == sub_dim);
        CHECK(entanglement_entropy(rdm.rho) <=
              std::log(static_cast<double>(sub_dim)) + 1e-12);
      }
    }
  }
  SUBCASE("errors") {
    auto lat = build_lattice(LatticeKind::chain, {4});
    auto basis = enumerate_blockaded(lat);
    auto psi = random_state(basis.dim(), 1);
    CHECK_THROWS_AS(reduced_density_matrix(psi, basis, {}), InvalidArgument);
    CHECK_THROWS_AS(reduced_density_matrix(psi, basis, {0, 1, 2, 3}),
                    InvalidArgument);
    CHECK_THROWS_AS(reduced_density_matrix(psi, basis, {7}), InvalidArgument);
    Eigen::MatrixXcd bad(2, 2);
    bad << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(entanglement_entropy(bad), NumericalError);
  }
  SUBCASE("maximally mixed single site") {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
    CHECK(entanglement_entropy(rho) == doctest::Approx(std::log(2.0)));
  }
}

TEST_CASE("evolution config validation") {
  EvolutionConfig cfg;
  cfg.krylov_dim = 3;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.total_time = 1.0;
  CHECK(cfg.n_steps() == 500);
}
