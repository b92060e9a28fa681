#include "scarsim/runner.hpp"

#include <cmath>
#include <map>

#include "scarsim/parallel.hpp"

namespace scarsim {

using nlohmann::json;

namespace {

bool two_dimensional(LatticeKind k) {
  return k != LatticeKind::chain && k != LatticeKind::zigzag_chain;
}

Bits resolve_state(const Lattice& lat, const std::string& name) {
  if (name == "AF1" || name == "AF2" || name == "GGG")
    return named_state(lat, name);
  return from_bitstring(name);
}

HamiltonianParts build_model(const ExperimentConfig& c, const Lattice& lat,
                             const ConstrainedBasis& basis,
                             const PhysicalParams& p) {
  switch (c.model) {
    case Model::rydberg: return build_rydberg(lat, basis, p, c.cutoff);
    case Model::pxp: return build_pxp(lat, basis, p);
    case Model::sw2: return build_sw2(lat, basis, p, c.cutoff);
  }
  throw InvalidArgument("unknown model");
}

bool is_omegam_axis(const std::string& p) {
  return p == "drive.omegam.value" || p == "drive.omegam";
}

double axis_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_object() && v.contains("value") && v["value"].is_number())
    return v["value"].get<double>();
  throw ConfigError("omega_m axis values must be numbers");
}

}  // namespace

void check_runnable(const ExperimentConfig& c) {
  const Lattice lat = c.lattice.build();
  if (c.reference_only)
    throw CapacityError("\"" + c.name + "\" is reference-only: its " +
                        std::to_string(lat.n_sites()) + "-site " +
                        std::string(to_string(c.lattice.kind)) +
                        " lattice is beyond desk-scale simulation");
  if (two_dimensional(c.lattice.kind) && lat.n_sites() > kMaxRunnable2DSites)
    throw CapacityError(std::to_string(lat.n_sites()) + "-site " +
                        std::string(to_string(c.lattice.kind)) +
                        " patch exceeds the runnable 2D envelope of " +
                        std::to_string(kMaxRunnable2DSites) + " sites");
}

PreparedRun prepare_run(const ExperimentConfig& c) {
  c.validate();
  check_runnable(c);
  Lattice lat = c.lattice.build();
  const PhysicalParams p = c.physical.resolve();
  ConstrainedBasis basis = enumerate_blockaded(lat);
  const Bits init = resolve_state(lat, c.initial_state);
  if (!basis.contains(init))
    throw ConfigError("initial_state: \"" + c.initial_state +
                      "\" violates the blockade");
  HamiltonianParts parts = build_model(c, lat, basis, p);
  DriveProfile drive = c.drive.resolve(lat, p);
  std::optional<MicrostateOrdering> ordering;
  if (c.observables.microstates) {
    const bool chain = lat.kind() == LatticeKind::chain && !lat.periodic();
    ordering = order_microstates(chain ? reflection_grouping(basis, lat)
                                       : singleton_grouping(basis, lat));
  }
  return {std::move(lat),   p,      std::move(basis),
          std::move(parts), drive,  init,
          c.evolution.resolve(p), std::move(ordering)};
}

QuenchReport run_config(const ExperimentConfig& c) {
  auto run = prepare_run(c);
  QuenchReport rep;
  rep.rabi = run.params.omega;
  rep.ordering = run.ordering;
  ObservableRequest obs{c.observables.microstates, c.observables.entropy_cuts};
  const StateVector psi0 = basis_vector(run.basis, run.initial);
  const MicrostateOrdering* ord = run.ordering ? &*run.ordering : nullptr;

  if (run.drive.shape == DriveShape::pulsed) {
    const auto unit = unit_pxp(run.lattice, run.basis);
    const PulsedParams pp{c.drive.theta - kPi, c.drive.omega_tau,
                          c.drive.n_periods};
    pp.validate();
    QuenchRecorder rec(run.lattice, run.basis, obs, ord);
    StateVector psi = psi0;
    rec.record(0.0, psi);
    for (int n = 1; n <= pp.n_periods; ++n) {
      psi = apply_period(psi, pp, run.basis, unit);
      rec.record(n * run.drive.tau, psi);
    }
    rep.result = rec.take();
    if (c.observables.spectrum && pp.n_periods >= 2) {
      std::vector<double> index(rep.result.size());
      for (std::size_t k = 0; k < index.size(); ++k) index[k] = static_cast<double>(k);
      auto spec = fourier_spectrum(index, imbalance(rep.result), kPi);
      rep.subharmonic_weight = subharmonic_weight(spec, kTwoPi);
    }
  } else {
    rep.result = run_quench(run.lattice, run.basis, run.parts, run.drive, psi0,
                            run.evolution, obs, ord);
    const auto imb = imbalance(rep.result);
    if (c.observables.fit) {
      try {
        rep.fit = fit_damped_cosine(rep.result.times, imb);
      } catch (const InvalidArgument& e) {
        rep.fit_error = e.what();
      } catch (const NumericalError& e) {
        rep.fit_error = e.what();
      }
    }
    if (c.observables.spectrum && rep.result.size() >= 3) {
      rep.spectrum = fourier_spectrum(rep.result.times, imb);
      rep.dominant_peak = dominant_peak(*rep.spectrum);
      if (run.drive.periodic()) {
        rep.omegam = run.drive.omegam;
        if (*rep.omegam / 2.0 <= rep.spectrum->omegas.back())
          rep.subharmonic_weight = subharmonic_weight(*rep.spectrum, *rep.omegam);
      }
    }
  }
  if (c.model != Model::pxp) rep.predictors = decay_predictors(run.lattice, run.params);
  for (const auto& s : rep.result.entropies)
    rep.mean_entropy.push_back(rep.result.size() >= 2
                                   ? time_average(rep.result.times, s)
                                   : s.front());
  return rep;
}

json lattice_report(const ExperimentConfig& c) {
  c.validate();
  const Lattice lat = c.lattice.build();
  const PhysicalParams p = c.physical.resolve();
  json j;
  j["name"] = c.name;
  j["kind"] = std::string(to_string(lat.kind()));
  j["n_sites"] = lat.n_sites();
  j["n_a"] = lat.count(Sublattice::A);
  j["n_b"] = lat.count(Sublattice::B);
  j["periodic"] = lat.periodic();
  j["reference_only"] = c.reference_only;
  j["omega_mhz"] = c.physical.omega_mhz;
  if (p.v0 > 0.0) {
    j["v0_mhz"] = angular_to_mhz(p.v0);
    const double opt = optimal_detuning(lat, p);
    j["delta_q_opt_mhz"] = angular_to_mhz(opt);
    j["delta_q_opt_over_v0"] = opt / p.v0;
    j["delta_q_opt_over_omega"] = opt / p.omega;
    const auto d = decay_predictors(lat, p);
    j["decay_predictors"] = {{"x_mhz", d.x_mhz}, {"y_mhz", d.y_mhz}, {"site", d.site}};
    const auto rb = blockade_radius(p);
    j["rb_over_a"] = rb.rb_over_a;
    j["a_over_rb"] = rb.a_over_rb;
    j["predicted_lifetime_us"] = predict_lifetime(
        d.x_mhz, d.y_mhz, kReferenceAlpha, kReferenceBeta, 1.0 / kReferenceInvTau0);
  } else {
    j["v0_mhz"] = nullptr;
  }
  j["lattice"] = lat.to_json();
  return j;
}

std::string error_status(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e))
    return "config";
  if (dynamic_cast<const CapacityError*>(&e)) return "capacity";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  return "error";
}

SweepReport run_sweep(const ExperimentConfig& c, int jobs) {
  c.validate();
  if (!c.sweep) throw ConfigError("sweep: missing");
  check_runnable(c);
  const auto& axes = c.sweep->axes;
  const std::size_t n = c.sweep->size();

  SweepReport rep;
  rep.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& pt = rep.points[i];
    pt.index = i;
    std::size_t rest = i;
    pt.values.resize(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      pt.values[a] = axes[a].values[rest % axes[a].values.size()];
      rest /= axes[a].values.size();
    }
  }

  parallel_for(n, jobs, [&](std::size_t i) {
    auto& pt = rep.points[i];
    try {
      ExperimentConfig point = c;
      point.sweep.reset();
      for (std::size_t a = 0; a < axes.size(); ++a)
        point = with_parameter(point, axes[a].parameter, pt.values[a]);
      pt.report = run_config(point);
    } catch (const std::exception& e) {
      pt.status = error_status(e);
      pt.error = e.what();
    }
  });

  try {
    switch (c.sweep->aggregate) {
      case Aggregate::none:
        break;
      case Aggregate::decay_plane:
      case Aggregate::decay_alpha:
      case Aggregate::decay_beta: {
        std::vector<PlanePoint> pts;
        std::vector<double> xs, ys;
        for (const auto& pt : rep.points) {
          if (!pt.report || !pt.report->fit || !pt.report->fit->converged ||
              !pt.report->predictors)
            continue;
          const double inv_tau = 1.0 / pt.report->fit->tau;
          const auto& d = *pt.report->predictors;
          pts.push_back({d.x_mhz, d.y_mhz, inv_tau});
          xs.push_back(c.sweep->aggregate == Aggregate::decay_beta ? d.y_mhz
                                                                   : d.x_mhz);
          ys.push_back(inv_tau);
        }
        if (c.sweep->aggregate == Aggregate::decay_plane)
          rep.plane = fit_decay_plane(pts);
        else
          rep.line = fit_line(xs, ys);
        break;
      }
      case Aggregate::rigidity: {
        std::size_t wa = axes.size();
        for (std::size_t a = 0; a < axes.size(); ++a)
          if (is_omegam_axis(axes[a].parameter)) wa = a;
        if (wa == axes.size())
          throw ConfigError("sweep.aggregate: rigidity needs a drive.omegam.value axis");
        std::map<std::string, std::size_t> index;
        std::vector<std::vector<const SweepPoint*>> groups;
        for (const auto& pt : rep.points) {
          std::vector<json> key;
          for (std::size_t a = 0; a < axes.size(); ++a)
            if (a != wa) key.push_back(pt.values[a]);
          const std::string k = json(key).dump();
          auto [it, fresh] = index.emplace(k, groups.size());
          if (fresh) {
            groups.emplace_back();
            rep.rigidity.push_back({key, 0.0, ""});
          }
          groups[it->second].push_back(&pt);
        }
        for (std::size_t g = 0; g < groups.size(); ++g) {
          std::vector<double> grid, weights;
          auto& row = rep.rigidity[g];
          for (const auto* pt : groups[g]) {
            if (!pt->report || !pt->report->subharmonic_weight) {
              row.error = "point " + std::to_string(pt->index) + " has no weight";
              break;
            }
            grid.push_back(axis_number(pt->values[wa]));
            weights.push_back(*pt->report->subharmonic_weight);
          }
          if (!row.error.empty()) {
            row.rigidity = std::nan("");
            continue;
          }
          try {
            row.rigidity = subharmonic_rigidity(grid, weights);
          } catch (const std::exception& e) {
            row.rigidity = std::nan("");
            row.error = e.what();
          }
        }
        break;
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    rep.aggregate_error = e.what();
  }
  return rep;
}

FloquetMap run_floquet(const ExperimentConfig& c, int jobs) {
  c.validate();
  if (!c.floquet) throw ConfigError("floquet: missing");
  const auto& f = *c.floquet;
  if (f.map == FloquetMapKind::revival)
    return revival_fidelity_map(f.length, f.boundary, f.epsilons, f.omega_taus,
                                f.n_periods, f.initial_state, jobs);
  return pulsed_subharmonic_map(f.length, f.boundary, f.epsilons, f.omega_taus,
                                f.n_periods, f.initial_state, jobs);
}

}  // namespace scarsim
