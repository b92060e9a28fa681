#include <functional>
#include <map>

#include "scarsim/analysis.hpp"
#include "scarsim/config.hpp"

namespace scarsim {

using nlohmann::json;

namespace {

Quantity om(double v) { return {v, Unit::omega}; }
Quantity opt() { return {0.0, Unit::opt}; }

std::vector<json> range(double lo, double hi, double step) {
  std::vector<json> out;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int k = 0; k <= n; ++k) {
    // Rounded to 1e-9 so grids print as the intended decimals.
    out.push_back(std::round((lo + step * k) * 1e9) / 1e9);
  }
  return out;
}

std::vector<double> numbers(const std::vector<json>& v) {
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

LatticeSpec chain(int n, bool periodic = false) {
  LatticeSpec l;
  l.kind = LatticeKind::chain;
  l.nx = n;
  l.periodic = periodic;
  return l;
}

LatticeSpec patch(LatticeKind kind, int nx, int ny,
                  std::optional<int> n_sites = std::nullopt) {
  LatticeSpec l;
  l.kind = kind;
  l.nx = nx;
  l.ny = ny;
  l.n_sites = n_sites;
  return l;
}

json lattice_json(const LatticeSpec& l) {
  ExperimentConfig c;
  c.lattice = l;
  return to_json(c)["lattice"];
}

ExperimentConfig base(std::string name, std::string description,
                      LatticeSpec lat, std::optional<double> v0_mhz) {
  ExperimentConfig c;
  c.name = std::move(name);
  c.description = std::move(description);
  c.lattice = lat;
  c.physical.omega_mhz = 4.2;
  c.physical.v0_mhz = v0_mhz;
  c.model = v0_mhz ? Model::rydberg : Model::pxp;
  return c;
}

ExperimentConfig quench_opt(std::string name, std::string description,
                            LatticeSpec lat, double v0_mhz) {
  auto c = base(std::move(name), std::move(description), lat, v0_mhz);
  c.drive.shape = DriveShape::constant;
  c.drive.delta0 = opt();
  return c;
}

// Delta_0 as tabulated, a multiple of V0.
ExperimentConfig quench_v0(std::string name, std::string description,
                           LatticeSpec lat, double v0_mhz, double fraction) {
  auto c = base(std::move(name), std::move(description), lat, v0_mhz);
  c.drive.shape = DriveShape::constant;
  c.drive.delta0 = {fraction, Unit::v0};
  return c;
}

ExperimentConfig bare(std::string name, std::string description,
                      LatticeSpec lat, double v0_mhz, double delta0) {
  auto c = base(std::move(name), std::move(description), lat, v0_mhz);
  c.drive.shape = DriveShape::constant;
  c.drive.delta0 = om(delta0);
  return c;
}

ExperimentConfig driven(std::string name, std::string description,
                        LatticeSpec lat, std::optional<double> v0_mhz,
                        double omegam, double delta0, double deltam) {
  auto c = base(std::move(name), std::move(description), lat, v0_mhz);
  c.drive.shape = DriveShape::cosine;
  c.drive.delta0 = om(delta0);
  c.drive.deltam = om(deltam);
  c.drive.omegam = om(omegam);
  return c;
}

void sweep(ExperimentConfig& c, std::vector<SweepAxis> axes,
           Aggregate agg = Aggregate::none) {
  c.sweep = SweepSpec{std::move(axes), agg};
}

ExperimentConfig reference(ExperimentConfig c) {
  c.reference_only = true;
  return c;
}

ExperimentConfig floquet_preset(std::string name, std::string description,
                                FloquetMapKind kind, int n_periods,
                                std::vector<double> eps,
                                std::vector<double> taus, int length = 14) {
  auto c = base(std::move(name), std::move(description), chain(length, true),
                std::nullopt);
  c.drive.shape = DriveShape::pulsed;
  c.drive.theta = kPi;
  c.drive.omega_tau = kTauC;
  c.drive.n_periods = n_periods;
  FloquetSpec f;
  f.map = kind;
  f.length = length;
  f.boundary = Boundary::periodic;
  f.epsilons = std::move(eps);
  f.omega_taus = std::move(taus);
  f.n_periods = n_periods;
  c.floquet = std::move(f);
  return c;
}

std::vector<double> tau_grid() {
  std::vector<double> out;
  for (int k = 0; k <= 20; ++k) out.push_back(kTauC * (0.5 + 0.05 * k));
  return out;
}

std::vector<double> epsilon_grid() { return numbers(range(-1.5, 1.5, 0.1)); }

const std::map<std::string, std::function<ExperimentConfig()>, std::less<>>&
table() {
  static const std::map<std::string, std::function<ExperimentConfig()>,
                        std::less<>>
      t = {
          {"fig1-honeycomb",
           [] {
             return reference(quench_v0(
                 "fig1-honeycomb", "85-atom honeycomb quench at Delta_q,opt",
                 patch(LatticeKind::honeycomb, 14, 12, 85), 9.1, 0.15));
           }},
          {"fig2-chain",
           [] {
             auto c = quench_v0("fig2-chain",
                                 "9-atom chain quench at Delta_q,opt, V0 varied",
                                 chain(9), 19.0, 0.017);
             sweep(c, {{"physical.v0_mhz",
                        {5.9, 9.1, 12.6, 17.1, 19.0, 24.0, 34.0, 51.0}}});
             return c;
           }},
          {"fig2-square",
           [] {
             return reference(quench_v0(
                 "fig2-square", "49-atom square quench at Delta_q,opt",
                 patch(LatticeKind::square, 7, 7), 9.1, 0.33));
           }},
          {"fig2-honeycomb",
           [] {
             return reference(quench_v0(
                 "fig2-honeycomb", "85-atom honeycomb quench at Delta_q,opt",
                 patch(LatticeKind::honeycomb, 14, 12, 85), 9.1, 0.15));
           }},
          {"fig2-lieb",
           [] {
             return reference(quench_v0(
                 "fig2-lieb", "129-atom Lieb quench at Delta_q,opt",
                 patch(LatticeKind::lieb, 7, 7, 129), 9.1, 0.20));
           }},
          {"fig2-dechon",
           [] {
             return reference(quench_v0(
                 "fig2-dechon",
                 "54-atom decorated honeycomb quench at Delta_q,opt",
                 patch(LatticeKind::decorated_honeycomb, 8, 8, 54), 9.1, 0.10));
           }},
          {"fig2-eidh",
           [] {
             return reference(quench_v0(
                 "fig2-eidh",
                 "66-atom edge-imbalanced decorated honeycomb quench at "
                 "Delta_q,opt",
                 patch(LatticeKind::edge_imbalanced_decorated_honeycomb, 8, 8,
                       66),
                 9.1, 0.10));
           }},
          {"fig2-plane",
           [] {
             auto c = quench_opt(
                 "fig2-plane",
                 "decay-plane fit over runnable chain, square and honeycomb "
                 "patches and V0",
                 chain(9), 9.1);
             sweep(c,
                   {{"lattice",
                     {lattice_json(chain(9)),
                      lattice_json(patch(LatticeKind::square, 4, 4)),
                      lattice_json(patch(LatticeKind::honeycomb, 6, 4, 18))}},
                    {"physical.v0_mhz", {9.1, 12.6, 17.1, 24.0, 34.0}}},
                   Aggregate::decay_plane);
             return c;
           }},
          {"decay-alpha",
           [] {
             auto c = quench_opt("decay-alpha",
                                 "9-atom chain, V0 fixed, Omega varied below "
                                 "Omega/V0 = 0.5",
                                 chain(9), 5.9);
             c.model = Model::sw2;
             c.evolution.total_rabi_cycles = 6.3;
             sweep(c, {{"physical.omega_mhz", range(1.5, 2.95, 1.45 / 7)}},
                   Aggregate::decay_alpha);
             return c;
           }},
          {"decay-beta",
           [] {
             LatticeSpec z;
             z.kind = LatticeKind::zigzag_chain;
             z.nx = 9;
             z.zigzag_nnn_ratio = 2.0;
             auto c = quench_opt("decay-beta",
                                 "9-atom zigzag chain, NN spacing fixed, NNN "
                                 "spacing varied",
                                 z, 17.1);
             c.model = Model::sw2;
             c.evolution.total_rabi_cycles = 6.3;
             sweep(c, {{"lattice.zigzag_nnn_ratio", range(1.4, 2.0, 0.05)}},
                   Aggregate::decay_beta);
             return c;
           }},
          {"fig3b-bare",
           [] {
             return bare("fig3b-bare", "9-atom chain, V0 = 120 MHz, bare quench",
                         chain(9), 120.0, 0.50);
           }},
          {"fig3b-drive",
           [] {
             return driven("fig3b-drive",
                           "9-atom chain, V0 = 120 MHz, cosine drive",
                           chain(9), 120.0, 1.24, 0.85, 0.98);
           }},
          {"fig3c-chain",
           [] {
             auto c = driven("fig3c-chain",
                             "9-atom chain, V0 = 51 MHz, omega_m varied",
                             chain(9), 51.0, 1.2, 0.55, 0.55);
             sweep(c, {{"drive.omegam.value", range(0.5, 2.0, 0.1)}});
             return c;
           }},
          {"fig3c-honeycomb",
           [] {
             auto c = driven("fig3c-honeycomb",
                             "41-atom honeycomb, V0 = 24 MHz, omega_m varied",
                             patch(LatticeKind::honeycomb, 10, 10, 41), 24.0,
                             1.2, 0.87, 0.87);
             sweep(c, {{"drive.omegam.value", range(0.5, 2.0, 0.1)}});
             return reference(c);
           }},
          {"fig3c-eidh",
           [] {
             auto c = driven(
                 "fig3c-eidh",
                 "66-atom edge-imbalanced decorated honeycomb, V0 = 29 MHz",
                 patch(LatticeKind::edge_imbalanced_decorated_honeycomb, 8, 8,
                       66),
                 29.0, 1.2, 0.78, 0.98);
             sweep(c, {{"drive.omegam.value", range(0.5, 2.0, 0.1)}});
             return reference(c);
           }},
          {"fig3d-bare",
           [] {
             auto c = bare("fig3d-bare", "9-atom chain, V0 = 51 MHz, bare quench",
                           chain(9), 51.0, 0.21);
             c.observables.microstates = true;
             return c;
           }},
          {"fig3d-drive",
           [] {
             auto c = driven("fig3d-drive",
                             "9-atom chain, V0 = 51 MHz, cosine drive",
                             chain(9), 51.0, 1.15, 0.55, 0.55);
             c.observables.microstates = true;
             return c;
           }},
          {"fig3e-bare",
           [] {
             auto c = bare("fig3e-bare", "16-atom chain, V0 = 51 MHz, bare quench",
                           chain(16), 51.0, 0.21);
             c.observables.entropy_cuts = {8};
             return c;
           }},
          {"fig3e-drive",
           [] {
             auto c = driven("fig3e-drive",
                             "16-atom chain, V0 = 51 MHz, cosine drive",
                             chain(16), 51.0, 1.20, 0.55, 0.55);
             c.observables.entropy_cuts = {8};
             return c;
           }},
          {"fig4ab-chain",
           [] {
             auto c = driven("fig4ab-chain",
                             "9-atom chain, V0 = 51 MHz, omega_m scan",
                             chain(9), 51.0, 1.2, 0.55, 0.55);
             sweep(c, {{"drive.omegam.value", range(0.4, 2.0, 0.1)}});
             return c;
           }},
          {"fig4c-chain",
           [] {
             auto c = driven("fig4c-chain",
                             "9-atom chain, omega_m by a/R_b phase diagram",
                             chain(9), std::nullopt, 1.2, 0.55, 0.55);
             c.model = Model::rydberg;
             c.physical.a_over_rb = 0.75;
             sweep(c, {{"physical.a_over_rb", range(0.6, 0.9, 0.05)},
                       {"drive.omegam.value", range(0.5, 2.0, 0.1)}});
             return c;
           }},
          {"fig4c-honeycomb",
           [] {
             auto c = driven("fig4c-honeycomb",
                             "41-atom honeycomb, omega_m by a/R_b phase diagram",
                             patch(LatticeKind::honeycomb, 10, 10, 41),
                             std::nullopt, 1.2, 0.87, 0.87);
             c.model = Model::rydberg;
             c.physical.a_over_rb = 0.75;
             sweep(c, {{"physical.a_over_rb", range(0.6, 0.9, 0.05)},
                       {"drive.omegam.value", range(0.5, 2.0, 0.1)}});
             return reference(c);
           }},
          {"fig4d-chain",
           [] {
             auto c = driven("fig4d-chain",
                             "rigidity against chain length, V0 = 51 MHz",
                             chain(9), 51.0, 1.2, 0.55, 0.55);
             std::vector<json> lengths;
             for (int n = 3; n <= 17; n += 2) lengths.push_back(n);
             std::vector<json> grid;
             for (double w : rigidity_grid()) grid.push_back(w);
             sweep(c, {{"lattice.nx", lengths}, {"drive.omegam.value", grid}},
                   Aggregate::rigidity);
             return c;
           }},
          {"fig4d-honeycomb",
           [] {
             auto c = driven("fig4d-honeycomb",
                             "rigidity against honeycomb size, V0 = 17 MHz",
                             patch(LatticeKind::honeycomb, 20, 20, 9), 17.0,
                             1.2, 0.87, 0.87);
             std::vector<json> sizes;
             for (int n : {9, 18, 24, 41, 85, 200}) sizes.push_back(n);
             std::vector<json> grid;
             for (double w : rigidity_grid()) grid.push_back(w);
             sweep(c, {{"lattice.n_sites", sizes},
                       {"drive.omegam.value", grid}},
                   Aggregate::rigidity);
             return reference(c);
           }},
          {"figS7b-chain",
           [] {
             auto c = driven("figS7b-chain",
                             "24-atom chain, half-chain entropy against omega_m",
                             chain(24), 51.0, 1.2, 0.55, 0.55);
             c.observables.entropy_cuts = {12};
             c.observables.fit = false;
             sweep(c, {{"drive.omegam.value", range(1.0, 1.5, 0.05)}});
             return c;
           }},
          {"figS8-pxp-bare",
           [] {
             auto c = base("figS8-pxp-bare", "22-atom PXP ring, bare quench",
                           chain(22, true), std::nullopt);
             c.drive.shape = DriveShape::constant;
             c.observables.entropy_cuts = {11};
             return c;
           }},
          {"figS8-pxp-drive",
           [] {
             auto c = driven("figS8-pxp-drive", "22-atom PXP ring, cosine drive",
                             chain(22, true), std::nullopt, 1.33, 0.5, 1.0);
             c.observables.entropy_cuts = {11};
             return c;
           }},
          {"figS9a",
           [] {
             return floquet_preset("figS9a",
                                   "L = 14 ring, revival fidelity over 100 "
                                   "periods",
                                   FloquetMapKind::revival, 100, epsilon_grid(),
                                   tau_grid());
           }},
          {"figS9b",
           [] {
             return floquet_preset("figS9b",
                                   "L = 14 ring, subharmonic weight over 400 "
                                   "periods",
                                   FloquetMapKind::subharmonic, 400,
                                   epsilon_grid(), tau_grid());
           }},
          {"figS9-smoke",
           [] {
             return floquet_preset("figS9-smoke",
                                   "echo line: every value is 1",
                                   FloquetMapKind::revival, 20, {0.0},
                                   {0.5 * kTauC, kTauC, 1.5 * kTauC}, 10);
           }},
      };
  return t;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : table()) out.push_back(k);
  return out;
}

ExperimentConfig preset(std::string_view name) {
  const auto& t = table();
  auto it = t.find(name);
  if (it == t.end())
    throw ConfigError("unknown preset \"" + std::string(name) +
                      "\"; run `scarsim presets` for the list");
  auto c = it->second();
  c.validate();
  return c;
}

}  // namespace scarsim
