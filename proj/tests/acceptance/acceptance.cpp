// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scarsim/analysis.hpp"
#include "scarsim/config.hpp"
#include "scarsim/evolve.hpp"
#include "scarsim/floquet.hpp"
#include "scarsim/hilbert.hpp"
#include "scarsim/runner.hpp"

using namespace scarsim;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Criterion = std::function<void(Outcome&)>;

std::uint64_t fibonacci(int n) {
  std::uint64_t a = 0, b = 1;
  for (int k = 0; k < n; ++k) {
    const auto c = a + b;
    a = b;
    b = c;
  }
  return a;
}

std::vector<Bits> brute_force_chain(int n) {
  std::vector<Bits> out;
  for (Bits s = 0; s < (Bits{1} << n); ++s)
    if ((s & (s >> 1)) == 0) out.push_back(s);
  return out;
}

double max_abs(const StateVector& a) { return a.cwiseAbs().maxCoeff(); }

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
    sub.push_back((c % 4 + c / 4) % 2 == 0 ? Sublattice::A : Sublattice::B);
  }
  return Lattice(LatticeKind::square, pos, sub);
}

// 9-chain, V0 = 51 MHz, Delta_0 = Delta_m = 0.55 Omega, 1.5 us window.
ExperimentConfig locking_config(double omegam, const std::string& state) {
  auto c = preset("fig4ab-chain");
  c.sweep.reset();
  c.drive.omegam = {omegam, Unit::omega};
  c.initial_state = state;
  c.evolution.total_time_us = 1.5;
  c.observables.fit = false;
  return c;
}

// 16-site PXP ring under the S8 drive, half-ring entropy.
ExperimentConfig pxp_ring_config(std::optional<double> omegam) {
  auto c = preset(omegam ? "figS8-pxp-drive" : "figS8-pxp-bare");
  c.lattice.nx = 16;
  c.observables.entropy_cuts = {8};
  c.observables.fit = false;
  c.evolution.total_time_us = 1.5;
  if (omegam) c.drive.omegam = {*omegam, Unit::omega};
  return c;
}

double late_amplitude(const QuenchResult& r, double from_us) {
  const auto imb = imbalance(r);
  double m = 0.0;
  for (std::size_t k = 0; k < imb.size(); ++k)
    if (r.times[k] >= from_us - 1e-12) m = std::max(m, std::abs(imb[k]));
  return m;
}

void basis_exactness(Outcome& o) {
  auto lat = build_lattice(LatticeKind::chain, {9});
  auto basis = enumerate_blockaded(lat);
  auto classes = order_microstates(reflection_grouping(basis, lat));
  o.detail << "9-chain dim " << basis.dim() << ", classes " << classes.classes.size();
  o.require(basis.dim() == 89, "dim 89");
  o.require(classes.classes.size() == 51, "51 classes");
  bool fib = true, brute = true;
  for (int L = 3; L <= 20; ++L) {
    auto b = enumerate_blockaded(build_lattice(LatticeKind::chain, {L}));
    fib = fib && b.dim() == fibonacci(L + 2);
    if (L <= 16)
      brute = brute && std::vector<Bits>(b.states().begin(), b.states().end()) ==
                           brute_force_chain(L);
  }
  o.detail << "; F(L+2) for L=3..20 " << (fib ? "exact" : "broken")
           << "; brute force L<=16 " << (brute ? "exact" : "broken");
  o.require(fib, "Fibonacci law");
  o.require(brute, "brute force");
}

void detuning_constants(Outcome& o) {
  const auto p = PhysicalParams::from_mhz(4.2, 1.0);
  struct Case {
    const char* name;
    Lattice lat;
    double target;
  };
  const Case cases[] = {
      {"chain", build_lattice(LatticeKind::chain, {41}), 0.0173},
      {"honeycomb", build_lattice(LatticeKind::honeycomb, {20, 12}), 0.153},
      {"square", build_lattice(LatticeKind::square, {15, 15}), 0.33}};
  for (const auto& c : cases) {
    const double r = optimal_detuning(c.lat, p) / p.v0;
    o.detail << c.name << "(" << c.lat.n_sites() << ") " << r << "; ";
    o.require(std::abs(r / c.target - 1.0) <= 0.02, c.name);
  }
  o.require(cases[1].lat.n_sites() >= 200, "honeycomb patch size");
}

void many_body_echo(Outcome& o) {
  auto lat = pulsed_chain(12, Boundary::periodic);
  auto basis = enumerate_blockaded(lat);
  auto pxp = unit_pxp(lat, basis);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> tau(0.1, 8.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const PulsedParams p{0.0, tau(rng), 2};
    for (unsigned s = 0; s < 100; ++s) {
      const auto psi = random_state(basis.dim(), 1000u * k + s);
      const auto out = apply_period(apply_period(psi, p, basis, pxp), p, basis, pxp);
      worst = std::max(worst, (out - psi).norm());
    }
  }
  // P H P + H = 0 with P = (-1)^N: every flip entry changes N by one and the
  // diagonal vanishes, so each entry cancels exactly.
  double residual = 0.0;
  for (const auto& t : pxp.flip.triplets()) {
    const int dn = std::popcount(basis[t.row]) - std::popcount(basis[t.col]);
    const double sign = (dn % 2 == 0) ? 1.0 : -1.0;
    residual = std::max(residual, std::abs(sign * t.value + t.value));
  }
  for (double d : pxp.diag_static) residual = std::max(residual, std::abs(d));
  o.detail << "max ||U_F^2 psi - psi|| " << worst << " over 1000 states; "
           << "anticommutator residual " << residual;
  o.require(worst < 1e-8, "echo");
  o.require(residual == 0.0, "anticommutation");
}

void oracle_equivalence(Outcome& o) {
  double worst = 0.0, drift = 0.0;
  for (unsigned seed : {1u, 2u, 3u}) {
    auto lat = random_lattice(seed);
    auto basis = enumerate_blockaded(lat);
    auto h = build_rydberg(lat, basis, PhysicalParams::from_mhz(4.2, 30.0));
    const auto psi0 = random_state(basis.dim(), seed + 50);

    // Constant drive: one exact dense propagator for the whole interval.
    const double delta = mhz_to_angular(1.3);
    EvolutionConfig cfg;
    cfg.total_time = 1.0;
    cfg.record_stride = 500;
    auto r = run_quench(lat, basis, h, DriveProfile::constant(delta), psi0, cfg);
    worst = std::max(worst,
                     max_abs(r.final_state - dense_propagator(h, delta, 1.0) * psi0));

    // Cosine drive: the same midpoint steps, each exponentiated densely.
    auto drive = DriveProfile::cosine(mhz_to_angular(2.3), mhz_to_angular(4.1),
                                      mhz_to_angular(5.2));
    auto psi = psi0;
    StateVector dense = psi0;
    const double dt = 0.002;
    for (int s = 0; s < 250; ++s) {
      const double t = s * dt;
      psi = propagate_step(h, drive, psi, t, dt);
      dense = dense_propagator(h, detuning_at(drive, t + dt / 2), dt) * dense;
    }
    worst = std::max(worst, max_abs(psi - dense));

    // Norm over 5 us.
    EvolutionConfig longer;
    longer.total_time = 5.0;
    longer.record_stride = 100;
    auto rl = run_quench(lat, basis, h, drive, psi0, longer);
    drift = std::max(drift, std::abs(rl.final_state.norm() - 1.0));
  }
  o.detail << "max amplitude error " << worst << "; norm drift over 5 us " << drift;
  o.require(worst <= 1e-8, "Krylov vs dense");
  o.require(drift < 1e-9, "norm drift");
}

void revival_frequency(Outcome& o) {
  auto c = parse_config(R"({
    "name": "revival-12-ring", "model": "pxp",
    "lattice": {"kind": "chain", "nx": 12, "periodic": true},
    "physical": {"omega_mhz": 4.2},
    "drive": {"shape": "constant", "delta0": 0},
    "evolution": {"total_time_us": 1.5, "dt_us": 0.002, "record_stride": 5}})");
  const auto rep = run_config(c);
  o.require(rep.fit.has_value() && rep.fit->converged, "fit converged");
  if (!rep.fit) return;
  const double ratio = rep.fit->omega_tilde / rep.rabi;
  o.detail << "fitted Omega~/Omega " << ratio;
  o.require(ratio >= 0.55 && ratio <= 0.75, "ratio in [0.55, 0.75]");
}

void lifetime_consistency(Outcome& o) {
  const double om = mhz_to_angular(4.2);
  const auto chain = build_lattice(LatticeKind::chain, {41});
  const auto d = decay_predictors(chain, PhysicalParams::from_mhz(4.2, 19.0));
  const double tau_chain = predict_lifetime(d.x_mhz, d.y_mhz, kReferenceAlpha,
                                            kReferenceBeta, 1.0 / kReferenceInvTau0);
  const auto best_chain = optimal_lifetime(chain, om, kReferenceAlpha, kReferenceBeta,
                                           1.0 / kReferenceInvTau0);
  const auto honey = build_lattice(LatticeKind::honeycomb, {20, 12});
  const auto best_honey = optimal_lifetime(honey, om, kReferenceAlpha, kReferenceBeta,
                                           1.0 / kReferenceInvTau0);
  o.detail << "tau(chain, 19 MHz) " << tau_chain << " us, chain optimum "
           << best_chain.tau_us << " us at " << angular_to_mhz(best_chain.v0)
           << " MHz, honeycomb optimum " << best_honey.tau_us << " us; ";
  o.require(std::abs(tau_chain / 0.9 - 1.0) <= 0.15, "chain 0.9 us");
  o.require(std::abs(best_chain.tau_us / 0.9 - 1.0) <= 0.15, "chain optimum");
  o.require(std::abs(best_honey.tau_us / 0.4 - 1.0) <= 0.15, "honeycomb 0.4 us");

  for (const char* name : {"decay-alpha", "decay-beta"}) {
    const auto rep = run_sweep(preset(name), 0);
    std::size_t ok = 0;
    for (const auto& pt : rep.points)
      ok += pt.report && pt.report->fit && pt.report->fit->converged;
    o.require(rep.line.has_value(), std::string(name) + " line fit");
    if (!rep.line) continue;
    o.detail << name << ": slope " << rep.line->slope << ", R^2 "
             << rep.line->r_squared << " over " << ok << "/" << rep.points.size()
             << " points; ";
    o.require(ok == rep.points.size(), std::string(name) + " fits converged");
    o.require(rep.line->slope > 0.0, std::string(name) + " positive slope");
    o.require(rep.line->r_squared >= 0.9, std::string(name) + " R^2 >= 0.9");
  }
}

void subharmonic_locking(Outcome& o) {
  for (double wm : {0.6, 1.0, 1.2, 1.4}) {
    const auto rep = run_config(locking_config(wm, "AF1"));
    const auto& spec = *rep.spectrum;
    const double peak = *rep.dominant_peak;
    const double target = (wm < 0.8 ? wm : wm / 2) * rep.rabi;
    const double bins = std::abs(peak - target) / spec.grid_step();
    o.detail << "w_m " << wm << ": peak " << peak / rep.rabi << " Omega (" << bins
             << " bins); ";
    o.require(bins <= 1.0, "peak within one bin at w_m = " + std::to_string(wm));
  }
}

void driven_pxp(Outcome& o) {
  const auto bare = run_config(pxp_ring_config(std::nullopt));
  const auto driven = run_config(pxp_ring_config(1.33));
  const double s_bare = bare.mean_entropy.at(0), s_drive = driven.mean_entropy.at(0);
  const double a_bare = late_amplitude(bare.result, 1.0);
  const double a_drive = late_amplitude(driven.result, 1.0);
  o.detail << "mean S bare " << s_bare << " driven " << s_drive << "; late |I| bare "
           << a_bare << " driven " << a_drive << "; ";
  o.require(s_drive < s_bare, "entropy lower when driven");
  o.require(a_drive > a_bare, "late amplitude higher when driven");

  std::vector<double> grid, ent;
  for (int k = 0; k <= 10; ++k) {
    const double wm = 1.0 + 0.05 * k;
    grid.push_back(wm);
    ent.push_back(run_config(pxp_ring_config(wm)).mean_entropy.at(0));
  }
  const auto it = std::min_element(ent.begin(), ent.end());
  const auto at = static_cast<std::size_t>(it - ent.begin());
  o.detail << "scan minimum S " << *it << " at w_m " << grid[at] << " Omega";
  o.require(at > 0 && at + 1 < grid.size(), "interior minimum");
  o.require(std::abs(grid[at] - 1.225) <= 0.1 + 1e-9, "minimum near 1.225 Omega");
}

void initial_state(Outcome& o) {
  for (double wm : {1.0, 1.2, 1.4}) {
    const double w = wm * mhz_to_angular(4.2);
    double weight[2];
    double peak_bins = 0.0;
    int k = 0;
    for (const char* state : {"AF1", "GGG"}) {
      const auto rep = run_config(locking_config(wm, state));
      const auto& r = rep.result;
      const auto sa = fourier_spectrum(r.times, r.n_a);
      const auto sb = fourier_spectrum(r.times, r.n_b);
      weight[k] = 0.5 * (subharmonic_weight(sa, w) + subharmonic_weight(sb, w));
      if (k == 1) {
        std::size_t best = 1;
        for (std::size_t i = 1; i < sa.s2.size(); ++i)
          if (sa.s2[i] + sb.s2[i] > sa.s2[best] + sb.s2[best]) best = i;
        peak_bins = std::abs(sa.omegas[best] - w) / sa.grid_step();
      }
      ++k;
    }
    o.detail << "w_m " << wm << ": AF1 " << weight[0] << ", GGG " << weight[1]
             << " (harmonic peak " << peak_bins << " bins off); ";
    o.require(weight[0] > 0.2, "AF1 weight > 0.2");
    o.require(weight[1] < 0.05, "GGG weight < 0.05");
    o.require(peak_bins <= 1.0, "GGG harmonic peak");
  }
}

void spectral_calibration(Outcome& o) {
  const double T = 1.5;
  const double step = kTwoPi / (kGridRefinement * T);
  std::vector<double> t;
  for (int k = 0; k <= 750; ++k) t.push_back(0.002 * k);
  double worst = 0.0;
  for (int bin : {12, 40, 96}) {
    const double w = bin * step;
    std::vector<double> y;
    for (double x : t) y.push_back(std::cos(w * x));
    const auto free = fourier_spectrum(t, y);
    const auto pinned = fourier_spectrum(t, y, w);
    worst = std::max({worst, std::abs(*std::max_element(free.s2.begin(), free.s2.end()) - 1.0),
                      std::abs(*std::max_element(pinned.s2.begin(), pinned.s2.end()) - 1.0)});
  }
  const auto grid = rigidity_grid();
  const double ones = subharmonic_rigidity(grid, std::vector<double>(grid.size(), 1.0));
  o.detail << "cosine peak max |S^2 - 1| " << worst << " over three grid frequencies; rigidity(ones) "
           << ones << "; ";
  o.require(worst <= 1e-6, "cosine peak 1");
  o.require(ones == 11.0, "rigidity of ones");

  auto c = preset("fig4d-chain");
  c.sweep->axes[0].values = {3, 9};
  const auto rep = run_sweep(c, 0);
  o.require(rep.rigidity.size() == 2 && rep.rigidity[0].error.empty() &&
                rep.rigidity[1].error.empty(),
            "rigidity rows");
  if (rep.rigidity.size() != 2) return;
  o.detail << "rigidity L=3 " << rep.rigidity[0].rigidity << ", L=9 "
           << rep.rigidity[1].rigidity;
  o.require(rep.rigidity[1].rigidity > rep.rigidity[0].rigidity, "L=9 > L=3");
}

void entropy_properties(Outcome& o) {
  auto lat = build_lattice(LatticeKind::chain, {12});
  auto basis = enumerate_blockaded(lat);
  double product = 0.0, herm = 0.0, trace = 0.0, neg = 0.0, excess = -1.0;
  for (std::size_t k = 0; k < basis.dim(); k += 7) {
    const auto psi = basis_vector(basis, basis[k]);
    for (int cut = 1; cut < 12; ++cut)
      product = std::max(product, cut_entropy(psi, basis, cut));
  }
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto psi = random_state(basis.dim(), seed);
    for (int cut = 1; cut < 12; ++cut) {
      std::vector<int> sub(static_cast<std::size_t>(cut));
      std::iota(sub.begin(), sub.end(), 0);
      const auto rdm = reduced_density_matrix(psi, basis, sub);
      herm = std::max(herm, (rdm.rho - rdm.rho.adjoint()).cwiseAbs().maxCoeff());
      trace = std::max(trace, std::abs(rdm.rho.trace() - cplx(1.0)));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rdm.rho);
      neg = std::max(neg, -es.eigenvalues().minCoeff());
      const auto sub_dim =
          enumerate_blockaded(build_lattice(LatticeKind::chain, {cut})).dim();
      excess = std::max(excess, entanglement_entropy(rdm.rho) -
                                    std::log(static_cast<double>(sub_dim)));
    }
  }
  o.detail << "product-state S max " << product << "; S - ln(d_sub) max " << excess
           << "; hermiticity " << herm << ", trace " << trace
           << ", most negative eigenvalue " << -neg;
  o.require(product < 1e-12, "product states");
  o.require(excess <= 1e-12, "blockaded bound");
  o.require(herm <= 1e-12 && trace <= 1e-12 && neg <= 1e-12, "PSD trace one");
}

void pulsed_maps(Outcome& o) {
  const auto taus = preset("figS9a").floquet->omega_taus;
  const auto echo = revival_fidelity_map(14, Boundary::periodic, {0.0}, taus, 100);
  const double off = (echo.values.array() - 1.0).abs().maxCoeff();
  const auto rev =
      revival_fidelity_map(14, Boundary::periodic, {0.3, 1.5}, {kTauC}, 100);
  const auto sub = pulsed_subharmonic_map(14, Boundary::periodic, {0.5},
                                          {kTauC, kTauC / 2}, 400);
  o.detail << "eps=0 row max |F-1| " << off << "; revival(eps 0.3) " << rev.values(0, 0)
           << " vs (eps 1.5) " << rev.values(1, 0) << "; subharmonic(tau_c) "
           << sub.values(0, 0) << " vs (tau_c/2) " << sub.values(0, 1);
  o.require(off < 1e-10, "echo row");
  o.require(rev.values(0, 0) > rev.values(1, 0), "revival plateau");
  o.require(sub.values(0, 0) > sub.values(0, 1), "subharmonic at tau_c");
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::pair<const char*, Criterion>> criteria{
      {"constrained-basis exactness", basis_exactness},
      {"optimal-detuning constants", detuning_constants},
      {"many-body echo", many_body_echo},
      {"oracle equivalence", oracle_equivalence},
      {"scar revival frequency", revival_frequency},
      {"lifetime prediction consistency", lifetime_consistency},
      {"subharmonic locking", subharmonic_locking},
      {"driven PXP stabilization", driven_pxp},
      {"initial-state dependence", initial_state},
      {"spectral calibration", spectral_calibration},
      {"entropy properties", entropy_properties},
      {"pulsed-model maps", pulsed_maps},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    if (!only.empty() && std::find(only.begin(), only.end(), index) == only.end())
      continue;
    Outcome o;
    o.detail.precision(6);
    const auto start = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("%s %2d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", index, name, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  const std::size_t ran = only.empty() ? criteria.size() : only.size();
  std::printf("%zu of %zu criteria passed\n", ran - static_cast<std::size_t>(failed), ran);
  return failed;
}
