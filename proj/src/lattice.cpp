#include "scarsim/lattice.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <numeric>

namespace scarsim {

namespace {

constexpr std::array<std::pair<LatticeKind, std::string_view>, 7> kKindNames{{
    {LatticeKind::chain, "chain"},
    {LatticeKind::zigzag_chain, "zigzag_chain"},
    {LatticeKind::square, "square"},
    {LatticeKind::honeycomb, "honeycomb"},
    {LatticeKind::lieb, "lieb"},
    {LatticeKind::decorated_honeycomb, "decorated_honeycomb"},
    {LatticeKind::edge_imbalanced_decorated_honeycomb,
     "edge_imbalanced_decorated_honeycomb"},
}};

double raw_distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Rounds to 12 significant digits, the precision of the lattice file format.
double round12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // no negative zeros in files
}

struct RawPatch {
  std::vector<Point> positions;
  std::vector<Sublattice> labels;
};

RawPatch honeycomb_sites(int nx, int ny, double scale) {
  RawPatch p;
  const double dx = std::sqrt(3.0) / 2.0;
  for (int r = 0; r < ny; ++r) {
    for (int c = 0; c < nx; ++c) {
      const bool odd = (c + r) % 2 != 0;
      p.positions.push_back(
          {scale * c * dx, scale * (1.5 * r + (odd ? 0.5 : 0.0))});
      p.labels.push_back(odd ? Sublattice::B : Sublattice::A);
    }
  }
  return p;
}

// Decorated honeycomb: honeycomb vertices at spacing 2 plus one site at the
// midpoint of every bond. Vertices are labelled B, decorations A.
RawPatch decorated_honeycomb_sites(int nx, int ny) {
  RawPatch hc = honeycomb_sites(nx, ny, 2.0);
  RawPatch p;
  const auto n = hc.positions.size();
  for (std::size_t i = 0; i < n; ++i) {
    p.positions.push_back(hc.positions[i]);
    p.labels.push_back(Sublattice::B);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(raw_distance(hc.positions[i], hc.positions[j]) - 2.0) <
          kShellTolerance) {
        p.positions.push_back({0.5 * (hc.positions[i].x + hc.positions[j].x),
                               0.5 * (hc.positions[i].y + hc.positions[j].y)});
        p.labels.push_back(Sublattice::A);
      }
    }
  }
  return p;
}

// Removes the decoration sites that touch an under-coordinated vertex in the
// lower half of the patch, leaving the upper edge fully decorated.
RawPatch edge_imbalanced(RawPatch p) {
  const auto n = p.positions.size();
  double ymin = std::numeric_limits<double>::max();
  double ymax = std::numeric_limits<double>::lowest();
  for (const auto& q : p.positions) {
    ymin = std::min(ymin, q.y);
    ymax = std::max(ymax, q.y);
  }
  const double ymid = 0.5 * (ymin + ymax);
  std::vector<int> coord(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(raw_distance(p.positions[i], p.positions[j]) - 1.0) <
          kShellTolerance) {
        ++coord[i];
        ++coord[j];
      }
  std::vector<bool> drop(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (p.labels[i] != Sublattice::A || p.positions[i].y >= ymid) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (p.labels[j] == Sublattice::B && coord[j] < 3 &&
          std::abs(raw_distance(p.positions[i], p.positions[j]) - 1.0) <
              kShellTolerance) {
        drop[i] = true;
      }
    }
  }
  RawPatch out;
  for (std::size_t i = 0; i < n; ++i) {
    if (drop[i]) continue;
    out.positions.push_back(p.positions[i]);
    out.labels.push_back(p.labels[i]);
  }
  return out;
}

RawPatch trim_to_centroid(RawPatch p, int n_keep) {
  const int n = static_cast<int>(p.positions.size());
  if (n_keep <= 0)
    throw InvalidArgument("extent.n_sites must be positive");
  if (n_keep > n)
    throw InvalidArgument("extent.n_sites = " + std::to_string(n_keep) +
                          " exceeds the " + std::to_string(n) +
                          " sites of the underlying patch");
  double cx = 0.0, cy = 0.0;
  for (const auto& q : p.positions) {
    cx += q.x;
    cy += q.y;
  }
  cx /= n;
  cy /= n;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i)
    r[i] = round12(raw_distance(p.positions[i], {cx, cy}));
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return r[a] < r[b]; });
  order.resize(n_keep);
  std::sort(order.begin(), order.end());
  RawPatch out;
  for (int i : order) {
    out.positions.push_back(p.positions[i]);
    out.labels.push_back(p.labels[i]);
  }
  return out;
}

// Beyond-nearest-neighbour interaction energy (units of V0) of the state with
// every site of sublattice s excited.
double ordered_state_energy(const std::vector<Point>& pos,
                            const std::vector<Sublattice>& labels,
                            Sublattice s) {
  double e = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (labels[i] != s) continue;
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      if (labels[j] != s) continue;
      e += std::pow(raw_distance(pos[i], pos[j]), -6);
    }
  }
  return e;
}

// Makes A the energetically preferred sublattice: the larger one, or on a tie
// the one whose fully excited state has less long-range interaction energy.
void prefer_sublattice_a(RawPatch& p, bool periodic) {
  const auto na = std::count(p.labels.begin(), p.labels.end(), Sublattice::A);
  const auto nb = static_cast<std::ptrdiff_t>(p.labels.size()) - na;
  bool swap = nb > na;
  if (na == nb && !periodic) {
    const double ea = ordered_state_energy(p.positions, p.labels, Sublattice::A);
    const double eb = ordered_state_energy(p.positions, p.labels, Sublattice::B);
    swap = eb < ea - 1e-12 * std::max(1.0, ea);
  }
  if (swap)
    for (auto& l : p.labels)
      l = (l == Sublattice::A) ? Sublattice::B : Sublattice::A;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace

std::string_view to_string(LatticeKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

LatticeKind lattice_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw InvalidArgument("unknown lattice kind '" + std::string(name) + "'");
}

PhysicalParams PhysicalParams::from_mhz(double omega_mhz, double v0_mhz) {
  PhysicalParams p{mhz_to_angular(omega_mhz), mhz_to_angular(v0_mhz)};
  p.validate();
  return p;
}

void PhysicalParams::validate() const {
  if (!(omega > 0.0)) throw InvalidArgument("Rabi frequency must be positive");
  if (!(v0 > 0.0)) throw InvalidArgument("V0 must be positive");
}

Lattice::Lattice(LatticeKind kind, std::vector<Point> positions,
                 std::vector<Sublattice> sublattice, bool periodic)
    : kind_(kind),
      periodic_(periodic),
      positions_(std::move(positions)),
      sublattice_(std::move(sublattice)) {
  const int n = n_sites();
  require(n > 0, "lattice has no sites");
  require(sublattice_.size() == positions_.size(),
          "sublattice labels do not match the number of positions");
  if (periodic_) {
    require(kind_ == LatticeKind::chain,
            "periodic boundaries are only supported for chains");
    require(n >= 4 && n % 2 == 0,
            "a periodic chain needs an even number (>= 4) of sites to be "
            "bipartite");
  }

  coordination_.assign(n, 0);
  neighbors_.assign(n, {});
  double shell2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = distance(i, j);
      require(d > kShellTolerance, "sites " + std::to_string(i) + " and " +
                                       std::to_string(j) + " coincide");
      if (std::abs(d - 1.0) <= kShellTolerance) {
        if (sublattice_[i] == sublattice_[j])
          throw InvalidArgument("non-bipartite patch: nearest neighbours " +
                                std::to_string(i) + " and " +
                                std::to_string(j) + " share a sublattice");
        neighbors_[i].push_back(j);
        neighbors_[j].push_back(i);
        ++coordination_[i];
        ++coordination_[j];
      } else if (d > 1.0 + kShellTolerance) {
        shell2 = std::min(shell2, d);
      } else {
        throw InvalidArgument(
            "sites closer than the nearest-neighbour spacing: " +
            std::to_string(i) + ", " + std::to_string(j));
      }
    }
  }
  if (std::isfinite(shell2)) nnn_distance_ = shell2;
}

double Lattice::distance(int i, int j) const {
  const Point& a = positions_[i];
  const Point& b = positions_[j];
  if (periodic_) {
    const double len = n_sites();
    double dx = std::abs(a.x - b.x);
    dx = std::min(dx, len - dx);
    return std::hypot(dx, a.y - b.y);
  }
  return raw_distance(a, b);
}

bool Lattice::is_nearest_neighbor(int i, int j) const {
  return i != j && std::abs(distance(i, j) - 1.0) <= kShellTolerance;
}

Bits Lattice::neighbor_mask(int i) const {
  if (n_sites() > 64)
    throw CapacityError("bitmask operations support at most 64 sites, got " +
                        std::to_string(n_sites()));
  Bits m = 0;
  for (int j : neighbors_[i]) m |= Bits{1} << j;
  return m;
}

bool Lattice::sublattices_equivalent() const {
  switch (kind_) {
    case LatticeKind::chain:
    case LatticeKind::zigzag_chain:
    case LatticeKind::square:
    case LatticeKind::honeycomb:
      return true;
    default:
      return false;
  }
}

int Lattice::count(Sublattice s) const {
  return static_cast<int>(
      std::count(sublattice_.begin(), sublattice_.end(), s));
}

int Lattice::bulk_site(std::optional<Sublattice> only) const {
  const int n = n_sites();
  std::array<int, 2> max_coord{0, 0};
  for (int i = 0; i < n; ++i) {
    auto& m = max_coord[static_cast<int>(sublattice_[i])];
    m = std::max(m, coordination_[i]);
  }
  std::vector<int> boundary;
  for (int i = 0; i < n; ++i)
    if (coordination_[i] < max_coord[static_cast<int>(sublattice_[i])])
      boundary.push_back(i);

  int best = -1;
  double best_d = -1.0;
  for (int i = 0; i < n; ++i) {
    if (only && sublattice_[i] != *only) continue;
    double d = std::numeric_limits<double>::infinity();
    for (int b : boundary) d = std::min(d, distance(i, b));
    if (best < 0 || d > best_d + kShellTolerance) {
      best = i;
      best_d = d;
    }
  }
  if (best < 0) throw InvalidArgument("sublattice has no sites");
  return best;
}

nlohmann::json Lattice::to_json() const {
  nlohmann::json pos = nlohmann::json::array();
  nlohmann::json sub = nlohmann::json::array();
  for (int i = 0; i < n_sites(); ++i) {
    pos.push_back({round12(positions_[i].x), round12(positions_[i].y)});
    sub.push_back(sublattice_[i] == Sublattice::A ? "A" : "B");
  }
  return {{"kind", std::string(to_string(kind_))},
          {"periodic", periodic_},
          {"positions", pos},
          {"sublattice", sub}};
}

Lattice Lattice::from_json(const nlohmann::json& j) {
  try {
    const auto kind = lattice_kind_from_string(j.at("kind").get<std::string>());
    std::vector<Point> pos;
    for (const auto& p : j.at("positions"))
      pos.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    std::vector<Sublattice> sub;
    for (const auto& s : j.at("sublattice")) {
      const auto v = s.get<std::string>();
      if (v != "A" && v != "B")
        throw InvalidArgument("sublattice labels must be \"A\" or \"B\"");
      sub.push_back(v == "A" ? Sublattice::A : Sublattice::B);
    }
    return Lattice(kind, std::move(pos), std::move(sub),
                   j.value("periodic", false));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed lattice document: ") +
                          e.what());
  }
}

Lattice build_lattice(LatticeKind kind, const Extent& extent,
                      std::optional<double> zigzag_nnn_ratio) {
  require(extent.nx > 0 && extent.ny > 0, "extent must be positive");
  require(zigzag_nnn_ratio.has_value() == (kind == LatticeKind::zigzag_chain),
          "zigzag_nnn_ratio is required for zigzag chains and only for them");
  require(!extent.periodic || kind == LatticeKind::chain,
          "periodic boundaries are only supported for chains");
  const bool one_d =
      kind == LatticeKind::chain || kind == LatticeKind::zigzag_chain;
  require(!one_d || extent.ny == 1, "chains take a single extent (ny = 1)");

  RawPatch p;
  switch (kind) {
    case LatticeKind::chain:
      for (int i = 0; i < extent.nx; ++i) {
        p.positions.push_back({static_cast<double>(i), 0.0});
        p.labels.push_back(i % 2 == 0 ? Sublattice::A : Sublattice::B);
      }
      break;
    case LatticeKind::zigzag_chain: {
      const double r = *zigzag_nnn_ratio;
      require(r >= 1.0 && r <= 2.0, "zigzag_nnn_ratio must lie in [1, 2]");
      const double h = std::sqrt(std::max(0.0, 1.0 - 0.25 * r * r));
      for (int i = 0; i < extent.nx; ++i) {
        p.positions.push_back({0.5 * r * i, i % 2 == 0 ? 0.0 : h});
        p.labels.push_back(i % 2 == 0 ? Sublattice::A : Sublattice::B);
      }
      break;
    }
    case LatticeKind::square:
      for (int y = 0; y < extent.ny; ++y)
        for (int x = 0; x < extent.nx; ++x) {
          p.positions.push_back(
              {static_cast<double>(x), static_cast<double>(y)});
          p.labels.push_back((x + y) % 2 == 0 ? Sublattice::A : Sublattice::B);
        }
      break;
    case LatticeKind::honeycomb:
      p = honeycomb_sites(extent.nx, extent.ny, 1.0);
      break;
    case LatticeKind::lieb:
      for (int y = 0; y <= 2 * extent.ny; ++y)
        for (int x = 0; x <= 2 * extent.nx; ++x) {
          if (x % 2 == 1 && y % 2 == 1) continue;
          p.positions.push_back(
              {static_cast<double>(x), static_cast<double>(y)});
          p.labels.push_back((x + y) % 2 == 0 ? Sublattice::A : Sublattice::B);
        }
      break;
    case LatticeKind::decorated_honeycomb:
      p = decorated_honeycomb_sites(extent.nx, extent.ny);
      break;
    case LatticeKind::edge_imbalanced_decorated_honeycomb:
      p = edge_imbalanced(decorated_honeycomb_sites(extent.nx, extent.ny));
      break;
  }
  if (extent.n_sites) p = trim_to_centroid(std::move(p), *extent.n_sites);
  for (auto& q : p.positions) {
    q.x = round12(q.x);
    q.y = round12(q.y);
  }
  prefer_sublattice_a(p, extent.periodic);
  return Lattice(kind, std::move(p.positions), std::move(p.labels),
                 extent.periodic);
}

Eigen::MatrixXd interaction_matrix(const Lattice& lat,
                                   const PhysicalParams& p) {
  const int n = lat.n_sites();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = lat.distance(i, j);
      const double vij =
          lat.is_nearest_neighbor(i, j) ? p.v0 : p.v0 / std::pow(d, 6);
      v(i, j) = vij;
      v(j, i) = vij;
    }
  return v;
}

namespace {

double beyond_nn_half_sum(const Lattice& lat, const PhysicalParams& p,
                          int site) {
  double s = 0.0;
  for (int j = 0; j < lat.n_sites(); ++j) {
    if (j == site) continue;
    const double d = lat.distance(site, j);
    if (d > 1.0 + kShellTolerance) s += p.v0 / std::pow(d, 6);
  }
  return 0.5 * s;
}

DecayPredictors predictors_at(const Lattice& lat, const PhysicalParams& p,
                              int site) {
  const double x = lat.coordination()[site] * p.omega * p.omega / (4.0 * p.v0);
  double y = 0.0;
  if (const auto shell = lat.nnn_distance()) {
    for (int j = 0; j < lat.n_sites(); ++j) {
      if (j == site) continue;
      const double d = lat.distance(site, j);
      if (std::abs(d - *shell) <= kShellTolerance) y += p.v0 / std::pow(d, 6);
    }
  }
  return {angular_to_mhz(x), angular_to_mhz(y), site};
}

void require_bulk(const Lattice& lat) {
  if (lat.n_sites() < 3)
    throw InvalidArgument("lattice too small to contain a bulk site (" +
                          std::to_string(lat.n_sites()) + " sites)");
}

}  // namespace

double optimal_detuning(const Lattice& lat, const PhysicalParams& p) {
  require_bulk(lat);
  p.validate();
  if (lat.sublattices_equivalent())
    return beyond_nn_half_sum(lat, p, lat.bulk_site());
  return 0.5 * (beyond_nn_half_sum(lat, p, lat.bulk_site(Sublattice::A)) +
                beyond_nn_half_sum(lat, p, lat.bulk_site(Sublattice::B)));
}

BlockadeRadius blockade_radius(const PhysicalParams& p) {
  p.validate();
  const double r = std::pow(p.v0 / p.omega, 1.0 / 6.0);
  return {r, 1.0 / r};
}

DecayPredictors decay_predictors(const Lattice& lat, const PhysicalParams& p) {
  require_bulk(lat);
  p.validate();
  if (lat.sublattices_equivalent()) return predictors_at(lat, p, lat.bulk_site());
  const auto a = predictors_at(lat, p, lat.bulk_site(Sublattice::A));
  const auto b = predictors_at(lat, p, lat.bulk_site(Sublattice::B));
  const double rate_a = kReferenceAlpha * a.x_mhz + kReferenceBeta * a.y_mhz;
  const double rate_b = kReferenceAlpha * b.x_mhz + kReferenceBeta * b.y_mhz;
  return rate_b > rate_a ? b : a;
}

double predict_lifetime(double x_mhz, double y_mhz, double alpha, double beta,
                        double tau0_us) {
  if (x_mhz < 0.0 || y_mhz < 0.0)
    throw InvalidArgument("decay predictors must be non-negative");
  if (!(tau0_us > 0.0)) throw InvalidArgument("tau0 must be positive");
  return 1.0 / (alpha * x_mhz + beta * y_mhz + 1.0 / tau0_us);
}

LifetimeOptimum optimal_lifetime(const Lattice& lat, double omega, double alpha,
                                 double beta, double tau0_us) {
  auto rate = [&](double log_v0) {
    const PhysicalParams p{omega, std::exp(log_v0)};
    const auto d = decay_predictors(lat, p);
    return 1.0 / predict_lifetime(d.x_mhz, d.y_mhz, alpha, beta, tau0_us);
  };
  // The rate is convex in log V0 (sum of a/V0 and b V0 terms, maximised over
  // sublattices), so a golden-section search suffices.
  double lo = std::log(omega) - std::log(1e3);
  double hi = std::log(omega) + std::log(1e4);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = rate(c), fd = rate(d);
  while (hi - lo > 1e-10) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = rate(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = rate(d);
    }
  }
  const double v0 = std::exp(0.5 * (lo + hi));
  return {v0, 1.0 / rate(std::log(v0))};
}

}  // namespace scarsim
