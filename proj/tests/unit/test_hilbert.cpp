#include "doctest.h"

#include <bit>

#include "scarsim/hilbert.hpp"

using namespace scarsim;

namespace {

std::size_t fibonacci(int n) {
  std::size_t a = 0, b = 1;
  for (int k = 0; k < n; ++k) {
    const auto c = a + b;
    a = b;
    b = c;
  }
  return a;
}

// Every bitstring without two adjacent ones, by exhaustive filtering.
std::vector<Bits> brute_force_chain(int L, bool periodic) {
  std::vector<Bits> out;
  for (Bits s = 0; s < (Bits{1} << L); ++s) {
    bool ok = (s & (s >> 1)) == 0;
    if (periodic && L > 2 && ((s & 1u) && ((s >> (L - 1)) & 1u))) ok = false;
    if (ok) out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("bitstrings put the highest site first") {
  CHECK(to_bitstring(0b1, 4) == "0001");
  CHECK(from_bitstring("1000") == 0b1000);
  CHECK(from_bitstring(to_bitstring(0b101101, 6)) == 0b101101);
  CHECK_THROWS_AS(from_bitstring("10x"), InvalidArgument);
}

TEST_CASE("open chains follow the Fibonacci law") {
  for (int L = 3; L <= 20; ++L) {
    auto lat = build_lattice(LatticeKind::chain, {L});
    auto basis = enumerate_blockaded(lat);
    CHECK(basis.dim() == fibonacci(L + 2));
    if (L <= 16) {
      const auto expect = brute_force_chain(L, false);
      CHECK(std::vector<Bits>(basis.states().begin(), basis.states().end()) ==
            expect);
    }
  }
}

TEST_CASE("periodic chains match brute force") {
  for (int L : {4, 6, 10, 12, 14}) {
    auto lat = build_lattice(LatticeKind::chain, {L, 1, true});
    auto basis = enumerate_blockaded(lat);
    const auto expect = brute_force_chain(L, true);
    CHECK(std::vector<Bits>(basis.states().begin(), basis.states().end()) ==
          expect);
    // Lucas numbers
    CHECK(basis.dim() == fibonacci(L - 1) + fibonacci(L + 1));
  }
}

TEST_CASE("2D bases are independent sets") {
  auto lat = build_lattice(LatticeKind::square, {3, 4});
  auto basis = enumerate_blockaded(lat);
  std::size_t brute = 0;
  for (Bits s = 0; s < (Bits{1} << lat.n_sites()); ++s) {
    bool ok = true;
    for (int i = 0; i < lat.n_sites() && ok; ++i)
      if (((s >> i) & 1u) && (s & lat.neighbor_mask(i))) ok = false;
    if (ok) {
      ++brute;
      CHECK(basis.contains(s));
    }
  }
  CHECK(basis.dim() == brute);
}

TEST_CASE("capacity guard") {
  auto lat = build_lattice(LatticeKind::chain, {20});
  CHECK_THROWS_AS(enumerate_blockaded(lat, 1000), CapacityError);
  auto big = build_lattice(LatticeKind::square, {8, 8});
  CHECK_THROWS_AS(enumerate_blockaded(big), CapacityError);
}

TEST_CASE("canonical states") {
  auto lat = build_lattice(LatticeKind::chain, {9});
  auto c = canonical_states(lat);
  CHECK(to_bitstring(c.af1, 9) == "101010101");
  CHECK(to_bitstring(c.af2, 9) == "010101010");
  CHECK(c.ggg == 0);
  CHECK(named_state(lat, "AF2") == c.af2);
  CHECK_THROWS_AS(named_state(lat, "Z2"), InvalidArgument);
  CHECK(count_on(lat, c.af1, Sublattice::A) == 5);
  CHECK(count_on(lat, c.af1, Sublattice::B) == 0);
}

TEST_CASE("nine-site chain microstate classes") {
  auto lat = build_lattice(LatticeKind::chain, {9});
  auto basis = enumerate_blockaded(lat);
  REQUIRE(basis.dim() == 89);
  auto ordering = order_microstates(reflection_grouping(basis, lat));
  REQUIRE(ordering.classes.size() == 51);

  std::size_t members = 0;
  for (const auto& c : ordering.classes) members += c.members.size();
  CHECK(members == 89);

  auto position = [&](const char* text) {
    const auto k = basis.index_of(from_bitstring(text));
    return ordering.class_of[k] + 1;  // one-based, as tabulated
  };
  CHECK(position("101010101") == 1);
  CHECK(position("000000000") == 36);
  CHECK(position("010101010") == 51);

  for (std::size_t k = 1; k < ordering.classes.size(); ++k) {
    const auto& a = ordering.classes[k - 1];
    const auto& b = ordering.classes[k];
    CHECK(a.imbalance_key() >= b.imbalance_key());
    if (a.imbalance_key() == b.imbalance_key())
      CHECK(a.filling_key() >= b.filling_key());
  }
}

TEST_CASE("grouping restrictions") {
  auto sq = build_lattice(LatticeKind::square, {2, 3});
  auto basis = enumerate_blockaded(sq);
  CHECK_THROWS_AS(reflection_grouping(basis, sq), InvalidArgument);
  auto single = singleton_grouping(basis, sq);
  CHECK(single.classes.size() == basis.dim());
}

TEST_CASE("hamming distance") {
  CHECK(hamming_from({0b1010, 4}, {0b0101, 4}) == 4);
  CHECK(hamming_from({0b1010, 4}, {0b1010, 4}) == 0);
  CHECK_THROWS_AS(hamming_from({0b1, 3}, {0b1, 4}), InvalidArgument);
}
