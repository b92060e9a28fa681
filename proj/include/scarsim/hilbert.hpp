#pragma once

// The Rydberg-blockaded Hilbert space: independent sets of the
// nearest-neighbour graph, canonical product states and microstate classes.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scarsim/common.hpp"
#include "scarsim/lattice.hpp"

namespace scarsim {

/// Default cap on the constrained dimension (2^24 states).
inline constexpr std::size_t kDefaultMaxDim = std::size_t{1} << 24;

/// A bitstring together with its length, so comparisons can check sizes.
struct BasisState {
  Bits bits = 0;
  int n_sites = 0;

  friend bool operator==(const BasisState&, const BasisState&) = default;
};

/// Bitstring text with the most significant (highest-index) site first.
std::string to_bitstring(Bits bits, int n_sites);
Bits from_bitstring(std::string_view text);

class ConstrainedBasis {
 public:
  ConstrainedBasis(int n_sites, std::vector<Bits> sorted_states);

  int n_sites() const { return n_sites_; }
  std::size_t dim() const { return states_.size(); }
  std::span<const Bits> states() const { return states_; }
  Bits operator[](std::size_t k) const { return states_[k]; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Index of `s`, or npos when s is not a member.
  std::size_t find(Bits s) const;
  /// Index of `s`; throws InvalidArgument when s is not a member.
  std::size_t index_of(Bits s) const;
  bool contains(Bits s) const { return find(s) != npos; }

 private:
  int n_sites_;
  std::vector<Bits> states_;
};

/// All blockade-respecting configurations, ascending by integer value.
/// Throws CapacityError when the dimension would exceed max_dim.
ConstrainedBasis enumerate_blockaded(const Lattice& lat,
                                     std::size_t max_dim = kDefaultMaxDim);

struct CanonicalStates {
  Bits af1 = 0;  // sublattice A excited
  Bits af2 = 0;  // sublattice B excited
  Bits ggg = 0;  // all ground
};

CanonicalStates canonical_states(const Lattice& lat);

/// Resolves "AF1", "AF2" or "GGG".
Bits named_state(const Lattice& lat, std::string_view name);

int count_on(const Lattice& lat, Bits s, Sublattice sub);

struct MicrostateClass {
  std::vector<Bits> members;  // ascending
  int n_a = 0;
  int n_b = 0;

  int imbalance_key() const { return n_a - n_b; }
  int filling_key() const { return n_a + n_b; }
};

struct MicrostateOrdering {
  int n_sites = 0;
  std::vector<MicrostateClass> classes;
  /// For each basis index, the index of the class containing it.
  std::vector<std::size_t> class_of;
};

/// Pairs every chain configuration with its mirror image.
MicrostateOrdering reflection_grouping(const ConstrainedBasis& basis,
                                       const Lattice& lat);

/// One class per basis state; the grouping used for non-chain lattices.
MicrostateOrdering singleton_grouping(const ConstrainedBasis& basis,
                                      const Lattice& lat);

/// Sorts classes by (n_A - n_B desc, n_A + n_B desc, smallest member's
/// bitstring asc) and refreshes class_of.
MicrostateOrdering order_microstates(MicrostateOrdering grouping);

/// Number of differing sites; throws InvalidArgument on a length mismatch.
int hamming_from(const BasisState& state, const BasisState& reference);

}  // namespace scarsim
