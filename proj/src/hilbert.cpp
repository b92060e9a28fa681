#include "scarsim/hilbert.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace scarsim {

std::string to_bitstring(Bits bits, int n_sites) {
  std::string s(static_cast<std::size_t>(n_sites), '0');
  for (int i = 0; i < n_sites; ++i)
    if ((bits >> i) & 1u) s[static_cast<std::size_t>(n_sites - 1 - i)] = '1';
  return s;
}

Bits from_bitstring(std::string_view text) {
  if (text.size() > 64) throw InvalidArgument("bitstring longer than 64 sites");
  Bits b = 0;
  const auto n = text.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (text[k] == '1')
      b |= Bits{1} << (n - 1 - k);
    else if (text[k] != '0')
      throw InvalidArgument("bitstring may only contain 0 and 1");
  }
  return b;
}

ConstrainedBasis::ConstrainedBasis(int n_sites, std::vector<Bits> sorted_states)
    : n_sites_(n_sites), states_(std::move(sorted_states)) {
  if (!std::is_sorted(states_.begin(), states_.end()) ||
      std::adjacent_find(states_.begin(), states_.end()) != states_.end())
    throw InvalidArgument("basis states must be strictly ascending");
}

std::size_t ConstrainedBasis::find(Bits s) const {
  const auto it = std::lower_bound(states_.begin(), states_.end(), s);
  if (it == states_.end() || *it != s) return npos;
  return static_cast<std::size_t>(it - states_.begin());
}

std::size_t ConstrainedBasis::index_of(Bits s) const {
  const auto k = find(s);
  if (k == npos)
    throw InvalidArgument("state " + to_bitstring(s, n_sites_) +
                          " is not in the constrained basis");
  return k;
}

ConstrainedBasis enumerate_blockaded(const Lattice& lat, std::size_t max_dim) {
  const int n = lat.n_sites();
  if (n > 63)
    throw CapacityError("constrained basis supports at most 63 sites, lattice "
                        "has " + std::to_string(n));
  std::vector<Bits> masks(n);
  for (int i = 0; i < n; ++i) masks[i] = lat.neighbor_mask(i);

  // Decide sites from the most significant down, trying 0 before 1, so the
  // states come out in ascending integer order.
  std::vector<Bits> states;
  std::vector<std::pair<int, Bits>> stack{{n - 1, Bits{0}}};
  while (!stack.empty()) {
    auto [site, bits] = stack.back();
    stack.pop_back();
    if (site < 0) {
      if (states.size() >= max_dim)
        throw CapacityError("constrained dimension exceeds the capacity bound "
                            "of " + std::to_string(max_dim) + " states");
      states.push_back(bits);
      continue;
    }
    if ((masks[site] & bits) == 0)
      stack.emplace_back(site - 1, bits | (Bits{1} << site));
    stack.emplace_back(site - 1, bits);
  }
  return ConstrainedBasis(n, std::move(states));
}

CanonicalStates canonical_states(const Lattice& lat) {
  const int n = lat.n_sites();
  if (n > 64) throw CapacityError("product states support at most 64 sites");
  CanonicalStates c;
  for (int i = 0; i < n; ++i) {
    if (lat.sublattice()[i] == Sublattice::A)
      c.af1 |= Bits{1} << i;
    else
      c.af2 |= Bits{1} << i;
  }
  for (int i = 0; i < n; ++i) {
    const Bits m = lat.neighbor_mask(i);
    const Bits own = (c.af1 >> i) & 1u ? c.af1 : c.af2;
    if (m & own)
      throw InvalidArgument("ordered states violate the blockade: a nearest-"
                            "neighbour pair shares a sublattice");
  }
  return c;
}

Bits named_state(const Lattice& lat, std::string_view name) {
  const auto c = canonical_states(lat);
  if (name == "AF1") return c.af1;
  if (name == "AF2") return c.af2;
  if (name == "GGG") return c.ggg;
  throw InvalidArgument("unknown initial state '" + std::string(name) +
                        "' (expected AF1, AF2 or GGG)");
}

int count_on(const Lattice& lat, Bits s, Sublattice sub) {
  int c = 0;
  for (int i = 0; i < lat.n_sites(); ++i)
    if (((s >> i) & 1u) && lat.sublattice()[i] == sub) ++c;
  return c;
}

namespace {

Bits mirror(Bits s, int n) {
  Bits r = 0;
  for (int i = 0; i < n; ++i)
    if ((s >> i) & 1u) r |= Bits{1} << (n - 1 - i);
  return r;
}

MicrostateClass make_class(const Lattice& lat, std::vector<Bits> members) {
  std::sort(members.begin(), members.end());
  MicrostateClass c;
  c.n_a = count_on(lat, members.front(), Sublattice::A);
  c.n_b = count_on(lat, members.front(), Sublattice::B);
  c.members = std::move(members);
  return c;
}

void rebuild_index(MicrostateOrdering& o, const ConstrainedBasis* basis) {
  if (basis == nullptr) {
    // Recover the basis order from the members themselves.
    std::vector<Bits> all;
    for (const auto& c : o.classes)
      all.insert(all.end(), c.members.begin(), c.members.end());
    std::sort(all.begin(), all.end());
    ConstrainedBasis b(o.n_sites, std::move(all));
    rebuild_index(o, &b);
    return;
  }
  o.class_of.assign(basis->dim(), 0);
  for (std::size_t k = 0; k < o.classes.size(); ++k)
    for (Bits s : o.classes[k].members) o.class_of[basis->index_of(s)] = k;
}

}  // namespace

MicrostateOrdering reflection_grouping(const ConstrainedBasis& basis,
                                       const Lattice& lat) {
  if (lat.kind() != LatticeKind::chain)
    throw InvalidArgument("reflection grouping is only defined for chains, "
                          "got " + std::string(to_string(lat.kind())));
  if (basis.n_sites() != lat.n_sites())
    throw InvalidArgument("basis and lattice sizes differ");
  const int n = lat.n_sites();
  MicrostateOrdering o;
  o.n_sites = n;
  for (Bits s : basis.states()) {
    const Bits m = mirror(s, n);
    if (m < s) continue;  // already grouped with its partner
    std::vector<Bits> members{s};
    if (m != s) members.push_back(m);
    o.classes.push_back(make_class(lat, std::move(members)));
  }
  rebuild_index(o, &basis);
  return o;
}

MicrostateOrdering singleton_grouping(const ConstrainedBasis& basis,
                                      const Lattice& lat) {
  if (basis.n_sites() != lat.n_sites())
    throw InvalidArgument("basis and lattice sizes differ");
  MicrostateOrdering o;
  o.n_sites = lat.n_sites();
  for (Bits s : basis.states()) o.classes.push_back(make_class(lat, {s}));
  rebuild_index(o, &basis);
  return o;
}

MicrostateOrdering order_microstates(MicrostateOrdering grouping) {
  const int n = grouping.n_sites;
  std::stable_sort(grouping.classes.begin(), grouping.classes.end(),
                   [n](const MicrostateClass& a, const MicrostateClass& b) {
                     if (a.imbalance_key() != b.imbalance_key())
                       return a.imbalance_key() > b.imbalance_key();
                     if (a.filling_key() != b.filling_key())
                       return a.filling_key() > b.filling_key();
                     auto smallest = [n](const MicrostateClass& c) {
                       std::string best = to_bitstring(c.members.front(), n);
                       for (Bits s : c.members)
                         best = std::min(best, to_bitstring(s, n));
                       return best;
                     };
                     return smallest(a) < smallest(b);
                   });
  rebuild_index(grouping, nullptr);
  return grouping;
}

int hamming_from(const BasisState& state, const BasisState& reference) {
  if (state.n_sites != reference.n_sites)
    throw InvalidArgument("hamming distance between states of different "
                          "lengths (" + std::to_string(state.n_sites) + " vs " +
                          std::to_string(reference.n_sites) + ")");
  return std::popcount(state.bits ^ reference.bits);
}

}  // namespace scarsim
