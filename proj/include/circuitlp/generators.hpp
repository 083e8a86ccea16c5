#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "circuitlp/instance.hpp"

namespace circuitlp {

// Deterministic instance families.  Every family ships a strictly feasible
// witness in x0 and produces a bounded feasible region by construction.
//
//   simplex          product of unit simplices, random nonnegative costs
//   mincost-flow     node-arc incidence of a random DAG, flow witness
//   generalized-flow arcs with positive gains, <= 2 nonzeros per column
//   dual-2vpi        two-variable rows plus per-variable box rows (needs n <= 2m)
//   polarized-block  [I | D] with one geometric column scale per extra column
LpInstance generate_instance(const std::string& kind, int m, int n, std::uint64_t seed);

std::vector<std::string> generator_kinds();

// Direct constructor for the block family: A = [I_m | D], D diagonal-ish with
// D(j, j) = 2^exponents[j], b = 1, c = (0,...,0, 1,...,1).  The optimal value
// is exactly 0.  Requires exponents.size() == n - m <= m.
LpInstance make_polarized_block(int m, const std::vector<int>& exponents);

// Same arc list the mincost-flow family uses, exposed so tests can rebuild the
// incidence matrix independently.  Arcs are (tail, head) with tail < head over
// m + 1 nodes; the last node's row is dropped to keep full row rank.
std::vector<std::pair<int, int>> mincost_flow_arcs(int m, int n, std::uint64_t seed);

}  // namespace circuitlp
