#pragma once

// doctest-flavored helpers shared by the unit suites; the framework-free
// oracles and generators live in oracles.hpp.

#include <doctest.h>

#include "oracles.hpp"

namespace artsim::testing {

inline void check_csr_invariants(const Graph& g) {
  const auto& rp = g.row_ptr();
  REQUIRE(rp.size() == g.num_nodes() + 1);
  CHECK(rp.front() == 0);
  CHECK(rp.back() == g.col_idx().size());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto nb = g.neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      CHECK(nb[i] < g.num_nodes());
      CHECK(nb[i] != v);                    // no self-loops
      if (i > 0) CHECK(nb[i - 1] < nb[i]);  // sorted, no duplicates
      CHECK(g.has_edge(nb[i], v));          // symmetry
    }
  }
}

}  // namespace artsim::testing
