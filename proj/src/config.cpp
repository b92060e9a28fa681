#include "scarsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "scarsim/hilbert.hpp"

namespace scarsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError((path.empty() ? std::string("config") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

/// Strict reader over one JSON object: remembers which keys were read so
/// leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void number(const std::string& key, double& out) {
    if (auto* v = get(key)) out = as_number(*v, join(path_, key));
  }
  void number(const std::string& key, std::optional<double>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) {
      out.reset();
      return;
    }
    out = as_number(*it, join(path_, key));
  }
  void integer(const std::string& key, int& out) {
    if (auto* v = get(key)) out = as_int(*v, join(path_, key));
  }
  void integer(const std::string& key, std::optional<int>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) {
      out.reset();
      return;
    }
    out = as_int(*it, join(path_, key));
  }
  void boolean(const std::string& key, bool& out) {
    if (auto* v = get(key)) {
      if (!v->is_boolean()) fail(join(path_, key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (auto* v = get(key)) {
      if (!v->is_string()) fail(join(path_, key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (auto* v = get(key)) {
      if (!v->is_array()) fail(join(path_, key), "expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(as_number((*v)[i], join(path_, key) + "[" +
                                               std::to_string(i) + "]"));
    }
  }
  void integers(const std::string& key, std::vector<int>& out) {
    if (auto* v = get(key)) {
      if (!v->is_array()) fail(join(path_, key), "expected an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        out.push_back(as_int((*v)[i], join(path_, key) + "[" +
                                          std::to_string(i) + "]"));
    }
  }

  /// Rejects keys that were never read.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(join(path_, k), "unknown field");
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }
  static int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto enum_field(const std::string& path, const json& v, F parse) {
  if (!v.is_string()) fail(path, "expected a string");
  try {
    return parse(v.get<std::string>());
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(); }
json opt_json(const std::optional<int>& v) { return v ? json(*v) : json(); }

json quantity_json(const Quantity& q) {
  return {{"value", q.value}, {"unit", std::string(to_string(q.unit))}};
}

Quantity quantity_from(const json& v, const std::string& path) {
  if (v.is_number()) return {Reader::as_number(v, path), Unit::omega};
  if (v.is_string()) {
    if (v.get<std::string>() != "opt")
      fail(path, "only the string \"opt\" is accepted as a quantity");
    return {0.0, Unit::opt};
  }
  Reader r(v, path);
  Quantity q;
  r.number("value", q.value);
  if (auto* u = r.get("unit"))
    q.unit = enum_field(join(path, "unit"), *u, unit_from_string);
  r.finish();
  return q;
}

}  // namespace

std::string_view to_string(Model m) {
  switch (m) {
    case Model::rydberg: return "rydberg";
    case Model::pxp: return "pxp";
    case Model::sw2: return "sw2";
  }
  return "";
}

Model model_from_string(std::string_view name) {
  if (name == "rydberg") return Model::rydberg;
  if (name == "pxp") return Model::pxp;
  if (name == "sw2") return Model::sw2;
  throw InvalidArgument("unknown model \"" + std::string(name) +
                        "\" (expected rydberg, pxp or sw2)");
}

std::string_view to_string(Unit u) {
  switch (u) {
    case Unit::omega: return "omega";
    case Unit::v0: return "v0";
    case Unit::mhz: return "mhz";
    case Unit::opt: return "opt";
  }
  return "";
}

Unit unit_from_string(std::string_view name) {
  if (name == "omega") return Unit::omega;
  if (name == "v0") return Unit::v0;
  if (name == "mhz") return Unit::mhz;
  if (name == "opt") return Unit::opt;
  throw InvalidArgument("unknown unit \"" + std::string(name) +
                        "\" (expected omega, v0, mhz or opt)");
}

std::string_view to_string(Aggregate a) {
  switch (a) {
    case Aggregate::none: return "none";
    case Aggregate::decay_plane: return "decay_plane";
    case Aggregate::decay_alpha: return "decay_alpha";
    case Aggregate::decay_beta: return "decay_beta";
    case Aggregate::rigidity: return "rigidity";
  }
  return "";
}

Aggregate aggregate_from_string(std::string_view name) {
  if (name == "none") return Aggregate::none;
  if (name == "decay_plane") return Aggregate::decay_plane;
  if (name == "decay_alpha") return Aggregate::decay_alpha;
  if (name == "decay_beta") return Aggregate::decay_beta;
  if (name == "rigidity") return Aggregate::rigidity;
  throw InvalidArgument("unknown aggregate \"" + std::string(name) +
                        "\" (expected none, decay_plane, decay_alpha, "
                        "decay_beta or rigidity)");
}

std::string_view to_string(FloquetMapKind k) {
  return k == FloquetMapKind::revival ? "revival" : "subharmonic";
}

FloquetMapKind floquet_map_from_string(std::string_view name) {
  if (name == "revival") return FloquetMapKind::revival;
  if (name == "subharmonic") return FloquetMapKind::subharmonic;
  throw InvalidArgument("unknown map \"" + std::string(name) +
                        "\" (expected revival or subharmonic)");
}

double Quantity::resolve(const Lattice& lat, const PhysicalParams& p) const {
  switch (unit) {
    case Unit::omega: return value * p.omega;
    case Unit::v0: return value * p.v0;
    case Unit::mhz: return mhz_to_angular(value);
    case Unit::opt: return optimal_detuning(lat, p);
  }
  return 0.0;
}

Lattice LatticeSpec::build() const {
  return build_lattice(kind, {nx, ny, periodic, n_sites}, zigzag_nnn_ratio);
}

PhysicalParams PhysicalSpec::resolve() const {
  PhysicalParams p{mhz_to_angular(omega_mhz), 0.0};
  if (v0_mhz) p.v0 = mhz_to_angular(*v0_mhz);
  if (a_over_rb) p.v0 = p.omega * std::pow(*a_over_rb, -6.0);
  return p;
}

DriveProfile DriveSpec::resolve(const Lattice& lat,
                                const PhysicalParams& p) const {
  switch (shape) {
    case DriveShape::constant:
      return DriveProfile::constant(delta0.resolve(lat, p));
    case DriveShape::cosine:
      return DriveProfile::cosine(delta0.resolve(lat, p), deltam.resolve(lat, p),
                                  omegam.resolve(lat, p));
    case DriveShape::square:
      return DriveProfile::square(delta0.resolve(lat, p), deltam.resolve(lat, p),
                                  omegam.resolve(lat, p));
    case DriveShape::pulsed:
      return DriveProfile::pulsed(theta, omega_tau / p.omega);
  }
  return {};
}

EvolutionConfig EvolutionSpec::resolve(const PhysicalParams& p) const {
  EvolutionConfig c;
  c.dt = dt_us;
  c.total_time = total_rabi_cycles
                     ? *total_rabi_cycles / angular_to_mhz(p.omega)
                     : total_time_us;
  c.record_stride = record_stride;
  c.krylov_dim = krylov_dim;
  c.enforce_drive_resolution = enforce_drive_resolution;
  return c;
}

std::size_t SweepSpec::size() const {
  std::size_t n = axes.empty() ? 0 : 1;
  for (const auto& a : axes) n *= a.values.size();
  return n;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["reference_only"] = c.reference_only;
  j["lattice"] = {{"kind", std::string(to_string(c.lattice.kind))},
                  {"nx", c.lattice.nx},
                  {"ny", c.lattice.ny},
                  {"periodic", c.lattice.periodic},
                  {"n_sites", opt_json(c.lattice.n_sites)},
                  {"zigzag_nnn_ratio", opt_json(c.lattice.zigzag_nnn_ratio)}};
  j["physical"] = {{"omega_mhz", c.physical.omega_mhz},
                   {"v0_mhz", opt_json(c.physical.v0_mhz)},
                   {"a_over_rb", opt_json(c.physical.a_over_rb)}};
  j["model"] = std::string(to_string(c.model));
  j["cutoff"] = opt_json(c.cutoff);
  j["drive"] = {{"shape", std::string(to_string(c.drive.shape))},
                {"delta0", quantity_json(c.drive.delta0)},
                {"deltam", quantity_json(c.drive.deltam)},
                {"omegam", quantity_json(c.drive.omegam)},
                {"theta", c.drive.theta},
                {"omega_tau", c.drive.omega_tau},
                {"n_periods", c.drive.n_periods}};
  j["initial_state"] = c.initial_state;
  j["evolution"] = {{"dt_us", c.evolution.dt_us},
                    {"total_time_us", c.evolution.total_time_us},
                    {"total_rabi_cycles", opt_json(c.evolution.total_rabi_cycles)},
                    {"record_stride", c.evolution.record_stride},
                    {"krylov_dim", c.evolution.krylov_dim},
                    {"enforce_drive_resolution",
                     c.evolution.enforce_drive_resolution}};
  j["observables"] = {{"microstates", c.observables.microstates},
                      {"entropy_cuts", c.observables.entropy_cuts},
                      {"fit", c.observables.fit},
                      {"spectrum", c.observables.spectrum}};
  if (c.sweep) {
    json axes = json::array();
    for (const auto& a : c.sweep->axes)
      axes.push_back({{"parameter", a.parameter}, {"values", a.values}});
    j["sweep"] = {{"axes", axes},
                  {"aggregate", std::string(to_string(c.sweep->aggregate))}};
  } else {
    j["sweep"] = nullptr;
  }
  if (c.floquet) {
    const auto& f = *c.floquet;
    j["floquet"] = {{"map", std::string(to_string(f.map))},
                    {"length", f.length},
                    {"boundary", std::string(to_string(f.boundary))},
                    {"epsilons", f.epsilons},
                    {"omega_taus", f.omega_taus},
                    {"n_periods", f.n_periods},
                    {"initial_state", f.initial_state}};
  } else {
    j["floquet"] = nullptr;
  }
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  r.string("name", c.name);
  r.string("description", c.description);
  r.boolean("reference_only", c.reference_only);

  if (auto* v = r.get("lattice")) {
    Reader l(*v, "lattice");
    if (auto* k = l.get("kind"))
      c.lattice.kind = enum_field("lattice.kind", *k, lattice_kind_from_string);
    l.integer("nx", c.lattice.nx);
    l.integer("ny", c.lattice.ny);
    l.boolean("periodic", c.lattice.periodic);
    l.integer("n_sites", c.lattice.n_sites);
    l.number("zigzag_nnn_ratio", c.lattice.zigzag_nnn_ratio);
    l.finish();
  }
  if (auto* v = r.get("physical")) {
    Reader p(*v, "physical");
    p.number("omega_mhz", c.physical.omega_mhz);
    p.number("v0_mhz", c.physical.v0_mhz);
    p.number("a_over_rb", c.physical.a_over_rb);
    p.finish();
  }
  if (auto* v = r.get("model")) c.model = enum_field("model", *v, model_from_string);
  r.number("cutoff", c.cutoff);
  if (auto* v = r.get("drive")) {
    Reader d(*v, "drive");
    if (auto* s = d.get("shape"))
      c.drive.shape = enum_field("drive.shape", *s, drive_shape_from_string);
    if (auto* q = d.get("delta0")) c.drive.delta0 = quantity_from(*q, "drive.delta0");
    if (auto* q = d.get("deltam")) c.drive.deltam = quantity_from(*q, "drive.deltam");
    if (auto* q = d.get("omegam")) c.drive.omegam = quantity_from(*q, "drive.omegam");
    d.number("theta", c.drive.theta);
    d.number("omega_tau", c.drive.omega_tau);
    d.integer("n_periods", c.drive.n_periods);
    d.finish();
  }
  r.string("initial_state", c.initial_state);
  if (auto* v = r.get("evolution")) {
    Reader e(*v, "evolution");
    e.number("dt_us", c.evolution.dt_us);
    e.number("total_time_us", c.evolution.total_time_us);
    e.number("total_rabi_cycles", c.evolution.total_rabi_cycles);
    e.integer("record_stride", c.evolution.record_stride);
    e.integer("krylov_dim", c.evolution.krylov_dim);
    e.boolean("enforce_drive_resolution", c.evolution.enforce_drive_resolution);
    e.finish();
  }
  if (auto* v = r.get("observables")) {
    Reader o(*v, "observables");
    o.boolean("microstates", c.observables.microstates);
    o.integers("entropy_cuts", c.observables.entropy_cuts);
    o.boolean("fit", c.observables.fit);
    o.boolean("spectrum", c.observables.spectrum);
    o.finish();
  }
  if (auto* v = r.get("sweep")) {
    Reader s(*v, "sweep");
    SweepSpec sw;
    if (auto* axes = s.get("axes")) {
      if (!axes->is_array()) fail("sweep.axes", "expected an array");
      for (std::size_t i = 0; i < axes->size(); ++i) {
        const std::string path = "sweep.axes[" + std::to_string(i) + "]";
        Reader a((*axes)[i], path);
        SweepAxis axis;
        a.string("parameter", axis.parameter);
        if (auto* vals = a.get("values")) {
          if (!vals->is_array()) fail(path + ".values", "expected an array");
          for (const auto& x : *vals) axis.values.push_back(x);
        }
        a.finish();
        sw.axes.push_back(std::move(axis));
      }
    }
    if (auto* a = s.get("aggregate"))
      sw.aggregate = enum_field("sweep.aggregate", *a, aggregate_from_string);
    s.finish();
    c.sweep = std::move(sw);
  }
  if (auto* v = r.get("floquet")) {
    Reader f(*v, "floquet");
    FloquetSpec fs;
    if (auto* m = f.get("map"))
      fs.map = enum_field("floquet.map", *m, floquet_map_from_string);
    f.integer("length", fs.length);
    if (auto* b = f.get("boundary"))
      fs.boundary = enum_field("floquet.boundary", *b, boundary_from_string);
    f.numbers("epsilons", fs.epsilons);
    f.numbers("omega_taus", fs.omega_taus);
    f.integer("n_periods", fs.n_periods);
    f.string("initial_state", fs.initial_state);
    f.finish();
    c.floquet = std::move(fs);
  }
  r.finish();
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (name.empty()) fail("name", "must not be empty");
  if (lattice.nx < 1) fail("lattice.nx", "must be positive");
  if (lattice.ny < 1) fail("lattice.ny", "must be positive");
  if (lattice.n_sites && *lattice.n_sites < 1)
    fail("lattice.n_sites", "must be positive");
  std::optional<Lattice> lat;
  try {
    lat = lattice.build();
  } catch (const Error& e) {
    fail("lattice", e.what());
  }

  if (!(physical.omega_mhz > 0.0)) fail("physical.omega_mhz", "must be positive");
  if (physical.v0_mhz && physical.a_over_rb)
    fail("physical", "give v0_mhz or a_over_rb, not both");
  if (physical.v0_mhz && !(*physical.v0_mhz > 0.0))
    fail("physical.v0_mhz", "must be positive");
  if (physical.a_over_rb && !(*physical.a_over_rb > 0.0))
    fail("physical.a_over_rb", "must be positive");
  const bool has_v0 = physical.v0_mhz || physical.a_over_rb;
  if (model != Model::pxp && !has_v0)
    fail("physical.v0_mhz", "required for the " +
                                std::string(to_string(model)) + " model");
  if (cutoff && !(*cutoff >= 1.0)) fail("cutoff", "must be at least 1 (units of a)");
  if (cutoff && model == Model::pxp) fail("cutoff", "has no meaning for the pxp model");

  if (drive.shape == DriveShape::pulsed) {
    if (model != Model::pxp) fail("drive.shape", "a pulsed drive requires model pxp");
    if (!(drive.omega_tau >= 0.0)) fail("drive.omega_tau", "must be non-negative");
    if (drive.n_periods < 1) fail("drive.n_periods", "must be at least 1");
  } else {
    const bool periodic =
        drive.shape == DriveShape::cosine || drive.shape == DriveShape::square;
    for (const auto* q : {&drive.delta0, &drive.deltam, &drive.omegam})
      if (q->unit != Unit::omega && q->unit != Unit::mhz && !has_v0)
        fail("drive", "units v0 and opt need an interaction strength");
    if (periodic) {
      if (drive.omegam.unit == Unit::opt)
        fail("drive.omegam", "the unit opt only applies to detunings");
      if (!(drive.omegam.value > 0.0)) fail("drive.omegam", "must be positive");
    }
  }

  const bool named =
      initial_state == "AF1" || initial_state == "AF2" || initial_state == "GGG";
  if (named) {
    // States of lattices above 64 sites have no bit representation; those
    // configs are reference-only and never evolved.
    if (lat->n_sites() <= 64) named_state(*lat, initial_state);
  } else {
    try {
      from_bitstring(initial_state);
    } catch (const Error&) {
      fail("initial_state", "expected AF1, AF2, GGG or a bitstring, got \"" +
                                initial_state + "\"");
    }
    if (static_cast<int>(initial_state.size()) != lat->n_sites())
      fail("initial_state", "bitstring length must equal the site count");
  }

  if (!(evolution.dt_us > 0.0)) fail("evolution.dt_us", "must be positive");
  if (!(evolution.total_time_us > 0.0))
    fail("evolution.total_time_us", "must be positive");
  if (evolution.total_rabi_cycles && !(*evolution.total_rabi_cycles > 0.0))
    fail("evolution.total_rabi_cycles", "must be positive");
  if (evolution.record_stride < 1) fail("evolution.record_stride", "must be at least 1");
  if (evolution.krylov_dim < 2) fail("evolution.krylov_dim", "must be at least 2");
  for (int cut : observables.entropy_cuts)
    if (cut < 1 || cut >= lat->n_sites())
      fail("observables.entropy_cuts",
           "cut " + std::to_string(cut) + " outside [1, n_sites - 1]");

  if (sweep) {
    if (sweep->axes.empty()) fail("sweep.axes", "must not be empty");
    const json base = to_json(*this);
    for (std::size_t i = 0; i < sweep->axes.size(); ++i) {
      const auto& a = sweep->axes[i];
      const std::string path = "sweep.axes[" + std::to_string(i) + "]";
      if (a.values.empty()) fail(path + ".values", "grid must not be empty");
      if (a.parameter.empty()) fail(path + ".parameter", "must not be empty");
      if (a.parameter.rfind("sweep", 0) == 0 || a.parameter == "name")
        fail(path + ".parameter", "cannot sweep \"" + a.parameter + "\"");
      const json* node = &base;
      std::stringstream ss(a.parameter);
      std::string key;
      while (std::getline(ss, key, '.')) {
        if (!node->is_object() || !node->contains(key))
          fail(path + ".parameter", "no such field \"" + a.parameter + "\"");
        node = &(*node)[key];
      }
    }
    const bool decay = sweep->aggregate == Aggregate::decay_plane ||
                       sweep->aggregate == Aggregate::decay_alpha ||
                       sweep->aggregate == Aggregate::decay_beta;
    if (decay && !observables.fit)
      fail("sweep.aggregate", "decay fits need observables.fit");
    if (decay && model == Model::pxp)
      fail("sweep.aggregate", "decay predictors need an interacting model");
    if (sweep->aggregate == Aggregate::rigidity && !observables.spectrum)
      fail("sweep.aggregate", "rigidity needs observables.spectrum");
  }

  if (floquet) {
    const auto& f = *floquet;
    if (f.epsilons.empty()) fail("floquet.epsilons", "grid must not be empty");
    if (f.omega_taus.empty()) fail("floquet.omega_taus", "grid must not be empty");
    for (double t : f.omega_taus)
      if (!(t >= 0.0)) fail("floquet.omega_taus", "values must be non-negative");
    if (f.n_periods < 1) fail("floquet.n_periods", "must be at least 1");
    if (f.length < 2) fail("floquet.length", "must be at least 2");
    if (f.initial_state != "AF1" && f.initial_state != "AF2" &&
        f.initial_state != "GGG")
      fail("floquet.initial_state", "expected AF1, AF2 or GGG");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Byte offsets are 1-based and point just past the offending character.
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": JSON syntax error");
  }
  return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig with_parameter(const ExperimentConfig& base,
                                const std::string& path, const json& value) {
  json j = to_json(base);
  json* node = &j;
  std::stringstream ss(path);
  std::string key;
  std::vector<std::string> keys;
  while (std::getline(ss, key, '.')) keys.push_back(key);
  if (keys.empty()) fail("sweep", "empty parameter path");
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->is_object() || !node->contains(keys[i]))
      fail(path, "no such field");
    node = &(*node)[keys[i]];
  }
  if (!node->is_object() || !node->contains(keys.back()))
    fail(path, "no such field");
  (*node)[keys.back()] = value;
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError("sweep value " + value.dump() + " for " + path + ": " +
                      e.what());
  }
}

}  // namespace scarsim
