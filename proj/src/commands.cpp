#include "scarsim/commands.hpp"

#include <chrono>
#include <functional>
#include <vector>

#include "scarsim/io.hpp"
#include "scarsim/runner.hpp"

namespace scarsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json opt_number(const std::optional<double>& x) {
  return x ? json(*x) : json(nullptr);
}

std::string value_text(const json& v) {
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Runs body, times it and writes manifest.json whatever the outcome.
json with_manifest(const std::string& command, const std::optional<ExperimentConfig>& c,
                   const fs::path& out,
                   const std::function<void(std::vector<std::string>&)>& body) {
  fs::create_directories(out);
  std::vector<std::string> outputs;
  json m;
  m["command"] = command;
  m["toolkit_version"] = std::string(kToolkitVersion);
  m["config_hash"] = c ? json(hash_hex(config_hash(*c))) : json(nullptr);
  m["config_name"] = c ? json(c->name) : json(nullptr);
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](const std::string& status, const std::string& error) {
    m["status"] = status;
    m["error"] = error.empty() ? json(nullptr) : json(error);
    m["outputs"] = outputs;
    m["wall_clock_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    write_json(out / "manifest.json", m);
  };
  try {
    if (c) {
      write_json(out / "config.json", to_json(*c));
      outputs.push_back("config.json");
    }
    body(outputs);
  } catch (const std::exception& e) {
    finish(error_status(e), e.what());
    throw;
  }
  finish("ok", "");
  return m;
}

json fit_json(const QuenchReport& r) {
  if (r.fit) return r.fit->to_json();
  json j;
  j["converged"] = false;
  j["error"] = r.fit_error;
  return j;
}

void write_classes_csv(const fs::path& path, const MicrostateOrdering& ord) {
  CsvWriter w(path, {"class", "n_a", "n_b", "size", "members"});
  for (std::size_t k = 0; k < ord.classes.size(); ++k) {
    const auto& cl = ord.classes[k];
    std::string members;
    for (Bits b : cl.members) {
      if (!members.empty()) members += ' ';
      members += to_bitstring(b, ord.n_sites);
    }
    w.row(std::vector<std::string>{std::to_string(k + 1), std::to_string(cl.n_a),
                                   std::to_string(cl.n_b),
                                   std::to_string(cl.members.size()), members});
  }
}

json summary_json(const QuenchReport& r) {
  json s;
  s["rabi_rad_us"] = r.rabi;
  s["n_snapshots"] = r.result.size();
  s["final_norm"] = r.result.final_state.norm();
  s["omegam_rad_us"] = opt_number(r.omegam);
  s["omegam_over_rabi"] = r.omegam ? json(*r.omegam / r.rabi) : json(nullptr);
  s["subharmonic_weight"] = opt_number(r.subharmonic_weight);
  s["dominant_peak_rad_us"] = opt_number(r.dominant_peak);
  s["dominant_peak_over_rabi"] =
      r.dominant_peak ? json(*r.dominant_peak / r.rabi) : json(nullptr);
  if (r.fit) {
    s["omega_tilde_over_rabi"] = r.fit->omega_tilde / r.rabi;
    s["tau_us"] = r.fit->tau;
    s["fit_converged"] = r.fit->converged;
  } else {
    s["omega_tilde_over_rabi"] = nullptr;
    s["tau_us"] = nullptr;
    s["fit_converged"] = nullptr;
  }
  if (r.predictors) {
    s["decay_predictors"] = {{"x_mhz", r.predictors->x_mhz},
                             {"y_mhz", r.predictors->y_mhz},
                             {"site", r.predictors->site}};
    s["predicted_lifetime_us"] =
        predict_lifetime(r.predictors->x_mhz, r.predictors->y_mhz, kReferenceAlpha,
                         kReferenceBeta, 1.0 / kReferenceInvTau0);
  } else {
    s["decay_predictors"] = nullptr;
    s["predicted_lifetime_us"] = nullptr;
  }
  json ent = json::array();
  for (std::size_t k = 0; k < r.mean_entropy.size(); ++k)
    ent.push_back({{"cut", r.result.entropy_cuts[k]}, {"mean", r.mean_entropy[k]}});
  s["mean_entropy"] = ent;
  return s;
}

void write_quench_outputs(const QuenchReport& r, const fs::path& dir,
                          std::vector<std::string>& outputs,
                          const std::string& prefix = "") {
  fs::create_directories(dir);
  auto emit = [&](const std::string& name) { outputs.push_back(prefix + name); };
  write_quench_csv(dir / "quench.csv", r.result);
  emit("quench.csv");
  if (!r.result.microstate_probs.empty()) {
    write_microstates_csv(dir / "microstates.csv", r.result);
    emit("microstates.csv");
  }
  if (r.ordering) {
    write_classes_csv(dir / "classes.csv", *r.ordering);
    emit("classes.csv");
  }
  if (r.fit || !r.fit_error.empty()) {
    write_json(dir / "fit.json", fit_json(r));
    emit("fit.json");
  }
  if (r.spectrum) {
    write_spectrum_csv(dir / "spectrum.csv", *r.spectrum, r.rabi, r.omegam);
    emit("spectrum.csv");
  }
  write_json(dir / "summary.json", summary_json(r));
  emit("summary.json");
}

}  // namespace

json cmd_lattice(const ExperimentConfig& c, const fs::path& out) {
  return with_manifest("lattice", c, out, [&](std::vector<std::string>& outputs) {
    write_json(out / "lattice.json", lattice_report(c));
    outputs.push_back("lattice.json");
  });
}

json cmd_quench(const ExperimentConfig& c, const fs::path& out) {
  return with_manifest("quench", c, out, [&](std::vector<std::string>& outputs) {
    if (c.sweep) throw ConfigError("sweep: use the sweep command for swept configs");
    write_quench_outputs(run_config(c), out, outputs);
  });
}

json cmd_sweep(const ExperimentConfig& c, const fs::path& out, int jobs) {
  return with_manifest("sweep", c, out, [&](std::vector<std::string>& outputs) {
    const SweepReport rep = run_sweep(c, jobs);
    const auto& axes = c.sweep->axes;

    std::vector<std::string> header{"index"};
    for (const auto& a : axes) header.push_back(a.parameter);
    for (const char* h :
         {"status", "error", "fit_converged", "omega_tilde_over_rabi", "tau_us",
          "inv_tau_mhz", "x_mhz", "y_mhz", "subharmonic_weight",
          "dominant_peak_over_rabi", "mean_entropy"})
      header.emplace_back(h);
    CsvWriter w(out / "sweep.csv", header);
    auto num = [](std::optional<double> x) {
      return x ? format_number(*x) : std::string();
    };
    for (const auto& pt : rep.points) {
      std::vector<std::string> row{std::to_string(pt.index)};
      for (const auto& v : pt.values) row.push_back(value_text(v));
      row.push_back(pt.status);
      row.push_back(pt.error);
      const QuenchReport* r = pt.report ? &*pt.report : nullptr;
      const bool fitted = r && r->fit;
      row.push_back(fitted ? (r->fit->converged ? "true" : "false") : "");
      row.push_back(fitted ? format_number(r->fit->omega_tilde / r->rabi) : "");
      row.push_back(fitted ? format_number(r->fit->tau) : "");
      row.push_back(fitted ? format_number(1.0 / r->fit->tau) : "");
      row.push_back(r && r->predictors ? format_number(r->predictors->x_mhz) : "");
      row.push_back(r && r->predictors ? format_number(r->predictors->y_mhz) : "");
      row.push_back(r ? num(r->subharmonic_weight) : "");
      row.push_back(r && r->dominant_peak ? format_number(*r->dominant_peak / r->rabi)
                                          : "");
      row.push_back(r && !r->mean_entropy.empty() ? format_number(r->mean_entropy.front())
                                                  : "");
      w.row(row);
      if (r) {
        char dir[16];
        std::snprintf(dir, sizeof dir, "%04zu", pt.index);
        write_quench_outputs(*r, out / "points" / dir, outputs,
                             std::string("points/") + dir + "/");
      }
    }
    outputs.push_back("sweep.csv");

    json agg;
    agg["aggregate"] = std::string(to_string(c.sweep->aggregate));
    agg["error"] = rep.aggregate_error.empty() ? json(nullptr) : json(rep.aggregate_error);
    agg["plane"] = rep.plane ? rep.plane->to_json() : json(nullptr);
    agg["line"] = rep.line ? json{{"slope", rep.line->slope},
                                  {"intercept", rep.line->intercept},
                                  {"r_squared", rep.line->r_squared}}
                           : json(nullptr);
    json rig = json::array();
    for (const auto& row : rep.rigidity)
      rig.push_back({{"group", row.group},
                     {"rigidity", row.error.empty() ? json(row.rigidity) : json(nullptr)},
                     {"error", row.error.empty() ? json(nullptr) : json(row.error)}});
    agg["rigidity"] = rig;
    std::size_t failed = 0;
    for (const auto& pt : rep.points) failed += pt.status != "ok";
    agg["n_points"] = rep.points.size();
    agg["n_failed"] = failed;
    write_json(out / "aggregate.json", agg);
    outputs.push_back("aggregate.json");

    if (!rep.rigidity.empty()) {
      std::vector<std::string> h;
      for (const auto& a : axes)
        if (a.parameter != "drive.omegam.value" && a.parameter != "drive.omegam")
          h.push_back(a.parameter);
      h.push_back("rigidity");
      h.push_back("error");
      CsvWriter rw(out / "rigidity.csv", h);
      for (const auto& row : rep.rigidity) {
        std::vector<std::string> f;
        for (const auto& v : row.group) f.push_back(value_text(v));
        f.push_back(row.error.empty() ? format_number(row.rigidity) : "");
        f.push_back(row.error);
        rw.row(f);
      }
      outputs.push_back("rigidity.csv");
    }
  });
}

json cmd_floquet(const ExperimentConfig& c, const fs::path& out, int jobs) {
  return with_manifest("floquet", c, out, [&](std::vector<std::string>& outputs) {
    const FloquetMap m = run_floquet(c, jobs);
    const double omega = mhz_to_angular(c.physical.omega_mhz);
    CsvWriter w(out / "map.csv", {"epsilon", "theta", "omega_tau", "tau_us", "value"});
    for (std::size_t i = 0; i < m.epsilons.size(); ++i)
      for (std::size_t j = 0; j < m.omega_taus.size(); ++j)
        w.row(std::vector<double>{m.epsilons[i], kPi + m.epsilons[i], m.omega_taus[j],
                                  m.omega_taus[j] / omega,
                                  m.values(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(j))});
    outputs.push_back("map.csv");
    json j;
    j["map"] = std::string(to_string(c.floquet->map));
    j["length"] = m.length;
    j["boundary"] = std::string(to_string(m.boundary));
    j["n_periods"] = m.n_periods;
    j["initial_state"] = m.initial_state;
    j["epsilons"] = m.epsilons;
    j["omega_taus"] = m.omega_taus;
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      std::vector<double> r(static_cast<std::size_t>(m.values.cols()));
      for (Eigen::Index k = 0; k < m.values.cols(); ++k)
        r[static_cast<std::size_t>(k)] = m.values(i, k);
      rows.push_back(r);
    }
    j["values"] = rows;
    write_json(out / "map.json", j);
    outputs.push_back("map.json");
  });
}

AnalyzeMode analyze_mode_from_string(std::string_view name) {
  if (name == "fit") return AnalyzeMode::fit;
  if (name == "spectrum") return AnalyzeMode::spectrum;
  throw ConfigError("unknown analyze mode \"" + std::string(name) +
                    "\" (expected fit or spectrum)");
}

json cmd_analyze(const fs::path& input, const AnalyzeOptions& opt,
                 const fs::path& out) {
  return with_manifest("analyze", std::nullopt, out,
                       [&](std::vector<std::string>& outputs) {
    const fs::path csv = fs::is_directory(input) ? input / "quench.csv" : input;
    if (!fs::exists(csv)) throw ConfigError(csv.string() + ": no such file");
    const auto series = read_quench_series(csv);
    if (opt.mode == AnalyzeMode::fit) {
      QuenchReport r;
      try {
        r.fit = fit_damped_cosine(series.times, series.imbalance);
      } catch (const InvalidArgument& e) {
        r.fit_error = e.what();
      } catch (const NumericalError& e) {
        r.fit_error = e.what();
      }
      write_json(out / "fit.json", fit_json(r));
      outputs.push_back("fit.json");
      return;
    }

    const fs::path summary = csv.parent_path() / "summary.json";
    json stored;
    if (fs::exists(summary)) stored = read_json(summary);
    double rabi;
    if (opt.omega_mhz) {
      if (!(*opt.omega_mhz > 0.0)) throw ConfigError("--omega-mhz must be positive");
      rabi = mhz_to_angular(*opt.omega_mhz);
    } else if (stored.contains("rabi_rad_us") && stored["rabi_rad_us"].is_number()) {
      rabi = stored["rabi_rad_us"].get<double>();
    } else {
      throw ConfigError("spectrum mode needs --omega-mhz (no summary.json beside " +
                        csv.string() + ")");
    }
    std::optional<double> omegam;
    if (opt.omegam_over_rabi) {
      // Reuse the stored angular value when it is the same drive, so the
      // output matches the inline run exactly.
      const auto& s = stored;
      if (!opt.omega_mhz && s.contains("omegam_rad_us") && s["omegam_rad_us"].is_number() &&
          s["omegam_over_rabi"].is_number() &&
          s["omegam_over_rabi"].get<double>() == *opt.omegam_over_rabi)
        omegam = s["omegam_rad_us"].get<double>();
      else
        omegam = *opt.omegam_over_rabi * rabi;
    }
    const Spectrum spec = fourier_spectrum(series.times, series.imbalance);
    write_spectrum_csv(out / "spectrum.csv", spec, rabi, omegam);
    outputs.push_back("spectrum.csv");
    json a;
    a["rabi_rad_us"] = rabi;
    a["window_us"] = spec.window;
    a["grid_step_rad_us"] = spec.grid_step();
    a["dominant_peak_rad_us"] = dominant_peak(spec);
    a["dominant_peak_over_rabi"] = dominant_peak(spec) / rabi;
    a["omegam_rad_us"] = opt_number(omegam);
    a["subharmonic_weight"] =
        omegam ? json(subharmonic_weight(spec, *omegam)) : json(nullptr);
    write_json(out / "analysis.json", a);
    outputs.push_back("analysis.json");
  });
}

int exit_code(const std::exception& e) {
  const std::string s = error_status(e);
  if (s == "config") return 2;
  if (s == "capacity") return 3;
  if (s == "numerical") return 4;
  return 1;
}

}  // namespace scarsim
